//! Scaling sweeps of the building-block norms against `λ`.

use gns_blocks::sweep::SweepTarget;
use gns_blocks::{make_profiles, scaling_sweep, BlockKind, JetScales, SweepResult, TemporalPattern};
use gns_geometry::WavevectorSet;
use gns_params::ScaleSet;
use rayon::prelude::*;

use crate::config::{join, LabConfig};
use crate::output::{Artifact, CheckTable, Outcome};
use crate::LabError;

pub const DEFAULT_LAMBDAS: [u64; 5] = [8, 16, 32, 64, 128];

/// Index of the oblique direction `(3/5, 4/5)` used for the sweeps.
const SWEEP_DIRECTION: usize = 2;

/// The swept targets with their slope tolerances.
pub fn targets(cfg: &LabConfig) -> Vec<(SweepTarget, f64)> {
    let mut v = Vec::new();
    for p in [1.0, 2.0] {
        for n in [0, 1] {
            v.push((SweepTarget::Block { kind: BlockKind::Jet, p, n, m: 0 }, cfg.tol.slope_block));
        }
    }
    for (m, gamma) in [(0, 1.0), (0, 2.0), (1, 2.0)] {
        v.push((SweepTarget::Temporal { gamma, m }, cfg.tol.slope_temporal));
    }
    v
}

pub fn scale_sets(cfg: &LabConfig, lambdas: &[u64]) -> Result<Vec<ScaleSet>, LabError> {
    if lambdas.len() < 4 {
        return Err(LabError::Config(format!("a sweep needs at least 4 lambda values, got {}", lambdas.len())));
    }
    if lambdas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(LabError::Config(format!("sweep lambdas must increase strictly, got {lambdas:?}")));
    }
    lambdas.iter().map(|&l| cfg.scales(l)).collect()
}

pub fn run(cfg: &LabConfig) -> Result<Outcome, LabError> {
    cfg.require_desk("sweep")?;
    let lambdas = cfg.lambdas_or(&DEFAULT_LAMBDAS);
    let scales = scale_sets(cfg, &lambdas)?;
    let set = WavevectorSet::build();
    let profile = make_profiles();
    let dir = &set.directions[SWEEP_DIRECTION];
    let targets = targets(cfg);
    let results: Vec<SweepResult> = targets
        .par_iter()
        .map(|(t, _)| scaling_sweep(*t, &scales, dir, set.n_lambda, &profile))
        .collect::<Result<_, _>>()?;

    let mut manifest = crate::base_manifest("sweep", cfg);
    manifest.push("lambdas", join(&lambdas));
    manifest.push("sweep_direction", SWEEP_DIRECTION);
    let mut table = CheckTable::default();
    let mut artifacts = Vec::new();
    for (r, (_, tol)) in results.iter().zip(&targets) {
        table.at_most(format!("{}.slope_error", r.label), r.slope_error(), *tol);
        table.measure(format!("{}.fitted_slope", r.label), r.fitted_slope);
        table.measure(format!("{}.predicted_exponent", r.label), r.predicted_exponent);
        table.measure(format!("{}.nominal_exponent", r.label), r.nominal_exponent);
        manifest.push(format!("tol_slope.{}", r.label), format!("{tol:e}"));
        artifacts.push(Artifact::text(format!("sweep_{}.csv", r.label), r.to_csv()));
    }
    for (l, s) in lambdas.iter().zip(&scales) {
        let js = JetScales::realize(s, set.n_lambda)?;
        let pat = TemporalPattern::standard(js.tau, js.sigma, set.len())?;
        let h = (0..pat.len()).map(|k| pat.h_sup(k)).fold(0.0, f64::max);
        table.at_most(format!("lambda{l}.h_sup"), h, 1.0);
        let prefix = format!("lambda{l}.");
        manifest.extend_prefixed(&prefix, s.manifest_entries());
        manifest.extend_prefixed(&prefix, js.manifest_entries());
    }
    artifacts.insert(0, Artifact::text("sweep_checks.csv", table.to_csv()));
    Ok(Outcome { campaign: "sweep".into(), artifacts, manifest, passed: table.passed(), summary: crate::summarize(&table) })
}
