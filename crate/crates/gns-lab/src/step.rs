//! One-step runs: the level `q+1` built on a seeded band-limited initial
//! level, with its structural checks, norms and snapshots. With several
//! frequencies the campaign becomes a trend sweep that fits the λ-slopes of
//! the stress components and of the corrector-to-principal ratio.

use std::sync::Arc;

use gns_iteration::report::{check_times, MeasureOptions};
use gns_iteration::{assemble_next, initial_step, measure_step, NextLevel, Relaxed, StepConfig, StepReport, TimeProfile};
use gns_params::{q_f64, ScaleSet};
use gns_torus::random::divergence_free;
use gns_torus::{snapshot, Grid};
use rayon::prelude::*;

use crate::config::{join, LabConfig};
use crate::identities::trial_rng;
use crate::output::{regressions_csv, Artifact, CheckTable, Manifest, Outcome, RegressionResult};
use crate::{grid_for, LabError};

pub const DEFAULT_LAMBDAS: [u64; 1] = [32];

/// Fourier band of the random stream function of `u₀`.
pub const SHAPE_BAND: i64 = 2;

/// Time profile of `u₀`.
pub const PROFILE: TimeProfile = TimeProfile::Bump { start: 0.0, end: 0.5 };

/// Stress components fitted by the trend sweep. The remainder is zero up
/// to rounding and the commutator does not depend on `λ` at fixed `ℓ`.
pub const TREND_STRESSES: [&str; 6] = ["r_lin", "r_osc1", "r_osc2", "r_osc3", "r_cor", "r_next"];

/// Jet band of the trend sweep: the band that retains nearly all of the
/// jet energy at the small frequencies swept.
pub fn trend_band(lambda: u64) -> i64 {
    4 * lambda as i64 - 2
}

/// Smallest power-of-two grid whose quarter exceeds the band.
pub fn trend_grid(band: i64) -> usize {
    grid_for(8, 4 * (band as usize + 1))
}

/// Builds the level `q+1` on the seeded initial level.
pub fn build_level(cfg: &LabConfig, scales: &ScaleSet, n: usize, band: Option<i64>) -> Result<NextLevel, LabError> {
    let grid = Grid::new(n)?;
    let mut rng = trial_rng(cfg.seed, 0);
    let shape = divergence_free(&grid, SHAPE_BAND, &mut rng)?;
    let init = initial_step(&shape, PROFILE, q_f64(cfg.alpha))?;
    let step = StepConfig { band, ..StepConfig::default() };
    Ok(assemble_next(Arc::new(init), scales, &step)?)
}

fn options(cfg: &LabConfig, scales: &ScaleSet, checks: bool) -> MeasureOptions {
    MeasureOptions {
        gamma: cfg.gamma.to_f64(),
        p: cfg.p.to_f64(),
        varrho: q_f64(scales.varrho),
        checks,
        support_samples: cfg.support_samples,
    }
}

fn level_manifest(manifest: &mut Manifest, prefix: &str, scales: &ScaleSet, level: &NextLevel, report: &StepReport) {
    manifest.extend_prefixed(prefix, scales.manifest_entries());
    manifest.extend_prefixed(prefix, level.scales.manifest_entries());
    manifest.push(format!("{prefix}grid_n"), level.grid().n());
    manifest.push(format!("{prefix}jet_band"), level.jets[0].band);
    let kept = level.jets.iter().map(|j| j.retained_energy()).fold(f64::INFINITY, f64::min);
    manifest.push(format!("{prefix}jet_retained_energy_min"), format!("{kept:e}"));
    manifest.push(format!("{prefix}delta_used"), format!("{:e}", level.delta));
    manifest.push(format!("{prefix}amplitude_step"), format!("{:e}", level.amplitude_step));
    manifest.push(format!("{prefix}time_step"), format!("{:e}", level.time_step()));
    manifest.push(format!("{prefix}kernel_nodes"), level.config.kernel_nodes);
    for r in &report.rows {
        if let Some(t) = r.tolerance {
            manifest.push(format!("{prefix}tol.{}", r.name), format!("{t:e}"));
        }
    }
}

pub fn run(cfg: &LabConfig) -> Result<Outcome, LabError> {
    cfg.require_desk("step")?;
    let lambdas = cfg.lambdas_or(&DEFAULT_LAMBDAS);
    match lambdas.as_slice() {
        [l] => single(cfg, *l),
        _ => trend(cfg, &lambdas),
    }
}

fn single(cfg: &LabConfig, lambda: u64) -> Result<Outcome, LabError> {
    let scales = cfg.scales(lambda)?;
    let level = build_level(cfg, &scales, cfg.grid_n, cfg.band)?;
    let report = measure_step(&level, &options(cfg, &scales, true))?;
    let mut manifest = crate::base_manifest("step", cfg);
    manifest.push("lambda", lambda);
    manifest.push("shape_band", SHAPE_BAND);
    manifest.push("initial_support", "0,0.5");
    level_manifest(&mut manifest, "", &scales, &level, &report);

    let mut artifacts = vec![Artifact::text("step_report.csv", report.to_csv())];
    let times: Vec<f64> = check_times(&level).into_iter().take(cfg.snapshots).collect();
    for (i, &t) in times.iter().enumerate() {
        let mut u = Vec::new();
        snapshot::write(&mut u, &level.velocity(t)?, t)?;
        let mut r = Vec::new();
        snapshot::write(&mut r, &level.stress(t)?, t)?;
        artifacts.push(Artifact { name: format!("snapshots/velocity_{i}.bin"), bytes: u });
        artifacts.push(Artifact { name: format!("snapshots/stress_{i}.bin"), bytes: r });
    }
    manifest.push("snapshot_times", join(&times.iter().map(|t| format!("{t:e}")).collect::<Vec<_>>()));
    let table = CheckTable {
        rows: report
            .rows
            .iter()
            .map(|r| crate::output::Check { name: r.name.clone(), value: r.value, tolerance: r.tolerance, pass: r.pass })
            .collect(),
    };
    Ok(Outcome { campaign: "step".into(), artifacts, manifest, passed: report.passed(), summary: crate::summarize(&table) })
}

/// The fitted trends of one sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct Trends {
    pub stresses: Vec<RegressionResult>,
    pub ratio: RegressionResult,
    pub reports: Vec<(u64, StepReport)>,
}

impl Trends {
    pub fn passed(&self) -> bool {
        self.ratio.pass && self.stresses.iter().all(|r| r.pass) && self.reports.iter().all(|(_, r)| r.passed())
    }
}

/// Runs one step per frequency and fits the trends.
pub fn trends(cfg: &LabConfig, lambdas: &[u64]) -> Result<(Trends, Manifest), LabError> {
    if lambdas.len() < 4 {
        return Err(LabError::Config(format!("a trend sweep needs at least 4 lambda values, got {}", lambdas.len())));
    }
    if lambdas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(LabError::Config(format!("sweep lambdas must increase strictly, got {lambdas:?}")));
    }
    let runs = lambdas
        .par_iter()
        .map(|&l| {
            let scales = cfg.scales(l)?;
            let band = cfg.band.unwrap_or_else(|| trend_band(l));
            let level = build_level(cfg, &scales, trend_grid(band), Some(band))?;
            let report = measure_step(&level, &options(cfg, &scales, cfg.step_checks))?;
            let mut m = Manifest::default();
            level_manifest(&mut m, &format!("lambda{l}."), &scales, &level, &report);
            Ok((l, report, m, scales))
        })
        .collect::<Result<Vec<_>, LabError>>()?;

    let mut manifest = crate::base_manifest("step", cfg);
    manifest.push("lambdas", join(lambdas));
    manifest.push("shape_band", SHAPE_BAND);
    manifest.push("initial_support", "0,0.5");
    manifest.push("step_checks", cfg.step_checks);
    for (_, _, m, _) in &runs {
        manifest.entries.extend(m.entries.iter().cloned());
    }
    let series = |name: &str| -> Vec<(f64, f64)> {
        runs.iter().map(|(l, r, _, _)| (*l as f64, r.value(name).unwrap_or(f64::NAN))).collect()
    };
    let stresses = TREND_STRESSES
        .iter()
        .map(|s| RegressionResult::decreasing(format!("{s}_L1t_Lvarrho_x"), series(&format!("{s}_L1t_Lvarrho_x")), cfg.tol.trend))
        .collect();
    let e = &runs[0].3.exponents;
    let predicted = q_f64(e.r_perp - e.r_par);
    let ratio = RegressionResult::fit("w_c_over_w_p_L2tx", series("w_c_over_w_p_L2tx"), predicted, cfg.tol.slope_ratio);
    manifest.push("ratio_predicted_slope", format!("{predicted:e}"));
    let reports = runs.into_iter().map(|(l, r, _, _)| (l, r)).collect();
    Ok((Trends { stresses, ratio, reports }, manifest))
}

fn trend(cfg: &LabConfig, lambdas: &[u64]) -> Result<Outcome, LabError> {
    let (t, manifest) = trends(cfg, lambdas)?;
    let mut all = t.stresses.clone();
    all.push(t.ratio.clone());
    let mut table = CheckTable::default();
    for r in &all {
        table.rows.push(crate::output::Check {
            name: format!("{}.fitted_slope", r.label),
            value: r.fitted_slope,
            tolerance: Some(r.tolerance),
            pass: Some(r.pass),
        });
    }
    let mut artifacts = vec![Artifact::text("trends.csv", regressions_csv(&all)), Artifact::text("trend_checks.csv", table.to_csv())];
    for (l, r) in &t.reports {
        artifacts.push(Artifact::text(format!("step_report_lambda{l}.csv"), r.to_csv()));
    }
    Ok(Outcome { campaign: "step".into(), artifacts, manifest, passed: t.passed(), summary: crate::summarize(&table) })
}
