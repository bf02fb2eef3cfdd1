//! Verification campaigns for the convex-integration scheme on the torus.
//!
//! Each campaign is a pure function of a [`LabConfig`] that returns its
//! artifacts in memory; [`Outcome::write`] is the single place that touches
//! the output directory. A campaign passes when every pass flag it reports
//! is true, which the command line turns into its exit code.

pub mod config;
pub mod constraints;
pub mod identities;
pub mod lemmas;
pub mod output;
pub mod step;
pub mod sweeps;

pub use config::{DecorrelationProfile, LabConfig, Tolerances};
pub use output::{Artifact, Check, CheckTable, Manifest, Outcome, RegressionResult};

use gns_blocks::BlockError;
use gns_iteration::IterationError;
use gns_torus::TorusError;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("config: {0}")]
    Config(String),
    #[error("check: {0}")]
    Check(String),
    #[error(transparent)]
    Torus(#[from] TorusError),
    #[error(transparent)]
    Blocks(#[from] BlockError),
    #[error(transparent)]
    Iteration(#[from] IterationError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// The campaigns, by command-line name.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Campaign {
    Identities,
    Sweep,
    Lemma64,
    Lemma65,
    Step,
    Constraints,
}

impl Campaign {
    pub fn name(self) -> &'static str {
        match self {
            Campaign::Identities => "identities",
            Campaign::Sweep => "sweep",
            Campaign::Lemma64 => "lemma64",
            Campaign::Lemma65 => "lemma65",
            Campaign::Step => "step",
            Campaign::Constraints => "constraints",
        }
    }

    pub fn run(self, cfg: &LabConfig) -> Result<Outcome, LabError> {
        match self {
            Campaign::Identities => identities::run(cfg),
            Campaign::Sweep => sweeps::run(cfg),
            Campaign::Lemma64 => lemmas::run_lemma64(cfg),
            Campaign::Lemma65 => lemmas::run_lemma65(cfg),
            Campaign::Step => step::run(cfg),
            Campaign::Constraints => constraints::run(cfg),
        }
    }
}

/// Smallest power of two that is at least `max(n, needed, 8)`.
pub fn grid_for(n: usize, needed: usize) -> usize {
    n.max(needed).max(8).next_power_of_two()
}

/// Campaign name, seed and configuration, the head of every manifest.
pub fn base_manifest(campaign: &str, cfg: &LabConfig) -> Manifest {
    let mut m = Manifest::default();
    m.push("campaign", campaign);
    m.push("seed", cfg.seed);
    m.extend_prefixed("", cfg.manifest_entries());
    m
}

/// One terminal line per check.
pub fn summarize(table: &CheckTable) -> Vec<String> {
    table
        .rows
        .iter()
        .map(|r| {
            let verdict = match r.pass {
                Some(true) => "pass",
                Some(false) => "FAIL",
                None => "",
            };
            let tol = r.tolerance.map(|t| format!(" (tol {t:e})")).unwrap_or_default();
            format!("{:<44} {:>14e}{tol} {verdict}", r.name, r.value)
        })
        .collect()
}
