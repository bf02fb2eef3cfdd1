//! Command-line front end of the verification campaigns.
//!
//! Exit codes: `0` when every pass flag holds, `1` when a check fails, `2`
//! for configuration and runtime errors. `GNS_LAB_THREADS` sets the size of
//! the worker pool; results do not depend on it.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gns_lab::config::parse_list;
use gns_lab::{Campaign, LabConfig, LabError};

pub const THREADS_ENV: &str = "GNS_LAB_THREADS";

#[derive(Parser, Debug)]
#[command(name = "gns-lab", version, about = "Verification campaigns for convex integration on the torus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Flat key=value configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// RNG seed for random trials; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "lab-out")]
    out: PathBuf,
    /// Grid points per axis; overrides `grid_n`.
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Comma-separated frequencies; overrides `lambda`.
    #[arg(long, global = true)]
    lambda: Option<String>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Operator core, geometric decomposition and building-block identities.
    Identities,
    /// Scaling sweeps of the block norms.
    Sweep,
    /// Decorrelation rate.
    Lemma64,
    /// Stationary-phase rate and the doubling comparison.
    Lemma65,
    /// One step, or a trend sweep when several frequencies are given.
    Step,
    /// Admissibility of the parameters.
    Constraints,
}

impl Command {
    fn campaign(self) -> Campaign {
        match self {
            Command::Identities => Campaign::Identities,
            Command::Sweep => Campaign::Sweep,
            Command::Lemma64 => Campaign::Lemma64,
            Command::Lemma65 => Campaign::Lemma65,
            Command::Step => Campaign::Step,
            Command::Constraints => Campaign::Constraints,
        }
    }
}

fn configure(cli: &Cli) -> Result<LabConfig, LabError> {
    let mut cfg = match &cli.config {
        Some(p) => LabConfig::load(p)?,
        None => LabConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(n) = cli.grid {
        cfg.grid_n = n;
    }
    if let Some(l) = &cli.lambda {
        cfg.lambdas = Some(parse_list("--lambda", l)?);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn init_threads() -> Result<(), LabError> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.trim().parse().map_err(|_| LabError::Config(format!("{THREADS_ENV} = {v:?} is not a thread count")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| LabError::Config(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let campaign = cli.command.campaign();
    let result = init_threads().and_then(|_| configure(&cli)).and_then(|cfg| {
        let outcome = campaign.run(&cfg)?;
        outcome.write(&cli.out)?;
        Ok(outcome)
    });
    match result {
        Ok(o) => {
            for line in &o.summary {
                println!("{line}");
            }
            let verdict = if o.passed { "PASS" } else { "FAIL" };
            println!("{} {verdict}: artifacts in {}", o.campaign, cli.out.display());
            if o.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("gns-lab {}: {e}", campaign.name());
            ExitCode::from(2)
        }
    }
}
