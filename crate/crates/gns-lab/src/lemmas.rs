//! Rate checks for the two auxiliary estimates: decorrelation of a slow
//! factor from a fast periodic one, and the gain of `|∇|^{−1}` on a product
//! with a high-frequency factor.
//!
//! The decorrelation functions depend on `x₁` only, so their norms on the
//! torus reduce to one-dimensional integrals, which are computed by
//! Gauss–Legendre quadrature on panels aligned with the quarter periods of
//! `g(σ·)`. Sign changes of `g` on the quarter lattice are then panel
//! boundaries and `|f g(σ·)|^p` is smooth on every panel.

use std::f64::consts::TAU;

use gns_blocks::quad::gauss_legendre;
use gns_torus::norms::lp;
use gns_torus::ops::{inverse_abs_gradient, project_high, project_nonzero};
use gns_torus::{Field, Grid};
use rayon::prelude::*;

use crate::config::{join, DecorrelationProfile, LabConfig};
use crate::output::{regressions_csv, Artifact, CheckTable, Outcome, RegressionResult};
use crate::{grid_for, LabError};

/// Panels over `[0, 1]` for the decorrelation integrals.
const PANELS: usize = 1 << 16;

pub const DEFAULT_PHASE_LAMBDAS: [u64; 5] = [8, 16, 32, 64, 128];

/// Width parameter of the smooth step; its transition is about `w/5` wide,
/// far below the shortest period `1/(4σ)` swept by default.
const STEP_WIDTH: f64 = 0.002;

/// `1 + ½(1 + tanh((cos 2π(x − 1/6) − ½)/w))`: about `2` on `(0, 1/3)` and
/// `1` elsewhere, with steep smooth transitions.
pub fn smooth_step(x: f64) -> f64 {
    1.0 + 0.5 * (1.0 + (((TAU * (x - 1.0 / 6.0)).cos() - 0.5) / STEP_WIDTH).tanh())
}

pub fn profile_fn(kind: DecorrelationProfile) -> fn(f64) -> f64 {
    match kind {
        DecorrelationProfile::Step => smooth_step,
        DecorrelationProfile::Sine => |x| 1.0 + 0.5 * (TAU * x).sin(),
        DecorrelationProfile::Constant => |_| 1.0,
    }
}

/// `∫₀¹ h` on `4σ·⌈PANELS/(4σ)⌉` panels aligned with the quarter periods.
fn integrate(h: impl Fn(f64) -> f64, sigma: i64) -> f64 {
    let quarters = 4 * sigma.max(1) as usize;
    let sub = PANELS.div_ceil(quarters);
    (0..quarters)
        .map(|j| gauss_legendre(&h, j as f64 / quarters as f64, (j + 1) as f64 / quarters as f64, sub))
        .sum()
}

fn norm_p(h: impl Fn(f64) -> f64, p: f64, sigma: i64) -> f64 {
    integrate(|x| h(x).abs().powf(p), sigma).powf(1.0 / p)
}

/// `‖f‖_{C¹} = sup|f| + sup|f′|` on a dense sample, `f′` by central differences.
pub fn c1_norm(f: &dyn Fn(f64) -> f64) -> f64 {
    let m = 1 << 18;
    let h = 1.0 / m as f64;
    let (mut s0, mut s1) = (0.0f64, 0.0f64);
    for i in 0..m {
        let x = i as f64 * h;
        s0 = s0.max(f(x).abs());
        s1 = s1.max(((f(x + 0.5 * h) - f(x - 0.5 * h)) / h).abs());
    }
    s0 + s1
}

#[derive(Clone, Debug, PartialEq)]
pub struct Decorrelation {
    pub regression: RegressionResult,
    /// `max_σ gap·σ^{1/p} / (‖f‖_{C¹}‖g‖_p)`.
    pub bound_constant: f64,
    /// `‖f‖_p ‖g‖_p`, the scale of the gaps.
    pub product: f64,
}

/// Measures `|‖f g(σ·)‖_p − ‖f‖_p‖g‖_p|` for each `σ` and fits the slope
/// against the predicted `−1/p`. `g` must have period one.
pub fn run_decorrelation_check(
    p: f64,
    sigmas: &[i64],
    f: &(dyn Fn(f64) -> f64 + Sync),
    g: &(dyn Fn(f64) -> f64 + Sync),
    tolerance: f64,
) -> Result<Decorrelation, LabError> {
    let c1 = c1_norm(&f);
    if c1 == 0.0 {
        return Err(LabError::Check("degenerate f: its C¹ norm vanishes".into()));
    }
    let nf = norm_p(f, p, 1);
    let ng = norm_p(g, p, 1);
    let points: Vec<(f64, f64)> = sigmas
        .par_iter()
        .map(|&s| {
            let sf = s as f64;
            let lhs = norm_p(|x| f(x) * g(sf * x), p, s);
            (sf, (lhs - nf * ng).abs())
        })
        .collect();
    let bound_constant = points.iter().map(|&(s, gap)| gap * s.powf(1.0 / p) / (c1 * ng)).fold(0.0, f64::max);
    let regression = RegressionResult::fit(format!("decorrelation_p{p}"), points, -1.0 / p, tolerance);
    Ok(Decorrelation { regression, bound_constant, product: nf * ng })
}

/// `‖|∇|^{−1}ℙ_{≠0}(a ℙ_{≥λ} f)‖_p` on the grid of `a` and `f`. Fails when
/// `ℙ_{≥λ} f` is rounding relative to `f`.
pub fn stationary_phase_lhs(a: &Field, f: &Field, lambda: f64, p: f64) -> Result<f64, LabError> {
    let high = project_high(f, lambda);
    if high.sup() <= 1e-12 * f.sup() {
        return Err(LabError::Check(format!("f has no content at |ξ| ≥ {lambda}")));
    }
    Ok(lp(&inverse_abs_gradient(&project_nonzero(&a.mul_scalar(&high)?)), p))
}

#[derive(Clone, Debug, PartialEq)]
pub struct StationaryPhase {
    pub regression: RegressionResult,
    /// Geometric mean of `λ·LHS / ‖f‖_p`.
    pub constant: f64,
}

/// Sweeps `λ` with `a(x)` and the single mode `f = cos 2πλx₁`, on the
/// smallest power-of-two grid with at least `4λ` points per axis.
pub fn run_stationary_phase_check(
    p: f64,
    lambdas: &[u64],
    a: &(dyn Fn(f64, f64) -> f64 + Sync),
    tolerance: f64,
) -> Result<StationaryPhase, LabError> {
    let points = lambdas
        .par_iter()
        .map(|&l| {
            let grid = Grid::new(grid_for(8, 4 * l as usize))?;
            let lf = l as f64;
            let f = Field::scalar_fn(&grid, |x, _| (TAU * lf * x).cos());
            let af = Field::scalar_fn(&grid, a);
            let lhs = stationary_phase_lhs(&af, &f, lf, p)?;
            Ok((lf, lhs, lp(&f, p)))
        })
        .collect::<Result<Vec<_>, LabError>>()?;
    let logs: f64 = points.iter().map(|&(l, v, nf)| (l * v / nf).ln()).sum::<f64>() / points.len() as f64;
    let regression = RegressionResult::fit(format!("stationary_phase_p{p}"), points.iter().map(|&(l, v, _)| (l, v)).collect(), -1.0, tolerance);
    Ok(StationaryPhase { regression, constant: logs.exp() })
}

/// The amplitudes of the stationary-phase campaign: `1 + ½cos 2πx₂` for the
/// slope, and the mean-free part `A cos 2πx₂` at two amplitudes for the
/// doubling comparison, where the left side is linear in `a`.
fn phase_amplitude(x2: f64) -> f64 {
    1.0 + 0.5 * (TAU * x2).cos()
}

pub fn run_lemma64(cfg: &LabConfig) -> Result<Outcome, LabError> {
    let f = profile_fn(cfg.decorrelation_f);
    let g = |x: f64| (TAU * x).sin();
    if cfg.sigmas.len() < 4 {
        return Err(LabError::Config(format!("the decorrelation fit needs at least 4 sigmas, got {}", cfg.sigmas.len())));
    }
    let d = run_decorrelation_check(cfg.lemma_p, &cfg.sigmas, &f, &g, cfg.tol.slope_lemma)?;
    let mut table = CheckTable::default();
    table.at_most("decorrelation.slope_residual", d.regression.residual, cfg.tol.slope_lemma);
    table.measure("decorrelation.fitted_slope", d.regression.fitted_slope);
    table.measure("decorrelation.bound_constant", d.bound_constant);
    table.measure("decorrelation.norm_product", d.product);
    let mut manifest = crate::base_manifest("lemma64", cfg);
    manifest.push("p", cfg.lemma_p);
    manifest.push("sigmas", join(&cfg.sigmas));
    manifest.push("f", format!("{:?}", cfg.decorrelation_f).to_lowercase());
    manifest.push("g", "sin(2 pi x1)");
    manifest.push("step_width", format!("{STEP_WIDTH:e}"));
    manifest.push("quadrature_panels", PANELS);
    Ok(Outcome {
        campaign: "lemma64".into(),
        artifacts: vec![Artifact::text("lemma64.csv", d.regression.to_csv()), Artifact::text("lemma64_checks.csv", table.to_csv())],
        manifest,
        passed: d.regression.pass && table.passed(),
        summary: crate::summarize(&table),
    })
}

pub fn run_lemma65(cfg: &LabConfig) -> Result<Outcome, LabError> {
    let lambdas = cfg.lambdas_or(&DEFAULT_PHASE_LAMBDAS);
    if lambdas.len() < 4 {
        return Err(LabError::Config(format!("the stationary-phase fit needs at least 4 lambda values, got {}", lambdas.len())));
    }
    let p = cfg.lemma_p;
    let tol = cfg.tol.slope_lemma;
    let main = run_stationary_phase_check(p, &lambdas, &|_, y| phase_amplitude(y), tol)?;
    let single = run_stationary_phase_check(p, &lambdas, &|_, y| 0.5 * (TAU * y).cos(), tol)?;
    let double = run_stationary_phase_check(p, &lambdas, &|_, y| (TAU * y).cos(), tol)?;
    let mut reg = [main.regression.clone(), single.regression.clone(), double.regression.clone()];
    reg[1].label = format!("{}_half_cos", reg[1].label);
    reg[2].label = format!("{}_cos", reg[2].label);
    let ratio = double.constant / single.constant;
    let mut table = CheckTable::default();
    table.at_most("stationary_phase.slope_residual", main.regression.residual, tol);
    table.measure("stationary_phase.fitted_slope", main.regression.fitted_slope);
    table.measure("stationary_phase.constant", main.constant);
    table.at_most("doubling.constant_ratio_error", (ratio / 2.0 - 1.0).abs(), cfg.tol.doubling);
    table.measure("doubling.constant_ratio", ratio);
    // ‖∇²a‖∞ of A cos 2πx₂ is 4π²A.
    table.measure("doubling.hessian_ratio", 1.0 / 0.5);
    let mut manifest = crate::base_manifest("lemma65", cfg);
    manifest.push("p", p);
    manifest.push("lambdas", join(&lambdas));
    manifest.push("a", "1 + 0.5 cos(2 pi x2)");
    manifest.push("doubling_a", "0.5 cos(2 pi x2) vs cos(2 pi x2)");
    manifest.push("f", "cos(2 pi lambda x1)");
    for &l in &lambdas {
        manifest.push(format!("lambda{l}.grid_n"), grid_for(8, 4 * l as usize));
    }
    Ok(Outcome {
        campaign: "lemma65".into(),
        artifacts: vec![Artifact::text("lemma65.csv", main.regression.to_csv()), Artifact::text("lemma65_all.csv", regressions_csv(&reg)), Artifact::text("lemma65_checks.csv", table.to_csv())],
        manifest,
        passed: main.regression.pass && table.passed(),
        summary: crate::summarize(&table),
    })
}
