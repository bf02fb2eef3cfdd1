//! Identity suites: the spectral operator core on seeded random fields, the
//! geometric decomposition on random matrices, and the building-block
//! identities at each configured frequency.

use gns_blocks::identities::check_jet_identities;
use gns_blocks::{make_profiles, GridJet, Jet, JetScales, TemporalPattern};
use gns_geometry::{Sym2, WavevectorSet, Q};
use gns_torus::ops::{divergence, fractional_laplacian, gradient, inverse_divergence, laplacian, leray_project};
use gns_torus::random::band_limited;
use gns_torus::{Field, Grid, Rank};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{join, LabConfig};
use crate::output::{Artifact, CheckTable, Manifest, Outcome};
use crate::{grid_for, LabError};

/// Default frequencies of the block identities.
pub const DEFAULT_LAMBDAS: [u64; 3] = [16, 32, 64];

/// Times at which the block identities are checked.
const BLOCK_TIMES: [f64; 3] = [0.0, 0.173, 0.61];

/// RNG for trial `i`: one ChaCha stream per trial, so trials can run in any
/// order and on any number of threads.
pub fn trial_rng(seed: u64, i: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i as u64);
    rng
}

fn rel(a: &Field, b: &Field) -> Result<f64, LabError> {
    let scale = a.sup().max(b.sup());
    let d = a.max_abs_diff(b)?;
    Ok(if scale > 0.0 { d / scale } else { d })
}

/// Worst residuals of the operator identities over seeded random fields.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct OperatorResiduals {
    pub div_inverse_divergence: f64,
    pub leray_idempotent: f64,
    pub leray_gradient: f64,
    pub fractional_unit: f64,
}

impl OperatorResiduals {
    fn max(self, o: Self) -> Self {
        Self {
            div_inverse_divergence: self.div_inverse_divergence.max(o.div_inverse_divergence),
            leray_idempotent: self.leray_idempotent.max(o.leray_idempotent),
            leray_gradient: self.leray_gradient.max(o.leray_gradient),
            fractional_unit: self.fractional_unit.max(o.fractional_unit),
        }
    }
}

fn operator_trial(grid: &Grid, band: i64, seed: u64, i: usize) -> Result<OperatorResiduals, LabError> {
    let mut rng = trial_rng(seed, i);
    let v = band_limited(grid, Rank::Vector, band, &mut rng);
    let phi = band_limited(grid, Rank::Scalar, band, &mut rng);
    let r = inverse_divergence(&v)?;
    let pv = leray_project(&v)?;
    let grad = gradient(&phi)?;
    Ok(OperatorResiduals {
        div_inverse_divergence: rel(&divergence(&r)?, &v)?,
        leray_idempotent: rel(&leray_project(&pv)?, &pv)?,
        leray_gradient: leray_project(&grad)?.sup() / grad.sup(),
        fractional_unit: rel(&fractional_laplacian(&phi, 1.0)?, &laplacian(&phi).scale(-1.0))?,
    })
}

/// Runs `trials` random fields band-limited to `n/4` on an `n²` grid.
pub fn operator_core(n: usize, trials: usize, seed: u64) -> Result<OperatorResiduals, LabError> {
    let grid = Grid::new(n)?;
    let band = n as i64 / 4;
    let all = (0..trials).into_par_iter().map(|i| operator_trial(&grid, band, seed, i)).collect::<Result<Vec<_>, _>>()?;
    Ok(all.into_iter().fold(OperatorResiduals::default(), OperatorResiduals::max))
}

/// A matrix uniformly distributed in the Frobenius ball of `radius` around
/// the identity, in the orthonormal coordinates `(m₁₁, √2 m₁₂, m₂₂)`.
pub fn random_in_ball<R: Rng>(rng: &mut R, radius: f64) -> Sym2 {
    loop {
        let v: [f64; 3] = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n <= 1.0 && n > 0.0 {
            let s = radius * rng.random::<f64>().cbrt() / n;
            return [1.0 + s * v[0], s * v[1] / 2f64.sqrt(), 1.0 + s * v[2]];
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeometryResiduals {
    pub reconstruction: f64,
    pub min_coefficient: f64,
    pub base_matches: bool,
}

/// Checks the decomposition on `count` random matrices inside the certified
/// ball and compares the base coefficients with the exact solve.
pub fn geometry_check(set: &WavevectorSet, count: usize, seed: u64) -> Result<GeometryResiduals, LabError> {
    let mut rng = trial_rng(seed, usize::MAX >> 1);
    let mut out = GeometryResiduals { reconstruction: 0.0, min_coefficient: f64::INFINITY, base_matches: false };
    for _ in 0..count {
        let r = random_in_ball(&mut rng, set.c_r);
        let g2 = set.decompose(&r).map_err(|e| LabError::Check(e.to_string()))?;
        let back = set.reconstruct(&g2);
        for i in 0..3 {
            out.reconstruction = out.reconstruction.max((back[i] - r[i]).abs());
        }
        out.min_coefficient = g2.iter().copied().fold(out.min_coefficient, f64::min);
    }
    let mut base = set.decomposition.base.clone();
    base.sort();
    let mut expect = vec![Q::new(17, 25), Q::new(41, 50), Q::new(1, 4), Q::new(1, 4)];
    expect.sort();
    out.base_matches = base == expect;
    Ok(out)
}

/// Identities and normalizations of the four jets and their temporal
/// pattern at one frequency.
pub fn block_checks(cfg: &LabConfig, lambda: u64, table: &mut CheckTable, manifest: &mut Manifest) -> Result<(), LabError> {
    let scales = cfg.scales(lambda)?;
    let set = WavevectorSet::build();
    let js = JetScales::realize(&scales, set.n_lambda)?;
    let grid = Grid::new(grid_for(cfg.grid_n, 4 * lambda as usize))?;
    let profile = make_profiles();
    let tol = cfg.tol.identity;
    let mut worst = [0.0f64; 7];
    let (mut energy, mut outer) = (0.0f64, 0.0f64);
    for d in &set.directions {
        let jet = Jet::new(d.clone(), js.clone(), &profile)?;
        let r = check_jet_identities(&jet, &grid, &BLOCK_TIMES)?;
        let vals = [r.oscillation, r.transport, r.curl_grid, r.curl_pointwise, r.leibniz, r.time_period, r.space_period];
        for (w, v) in worst.iter_mut().zip(vals) {
            *w = w.max(v);
        }
        energy = energy.max((jet.norm(gns_blocks::BlockKind::Jet, 0, 0, 2.0)? - 1.0).abs());
        let gj = GridJet::new(&jet, &grid, r.band)?;
        let m = gj.mean_outer();
        let k1 = d.k1_f64();
        let exact = [k1[0] * k1[0], k1[0] * k1[1], k1[1] * k1[1]];
        outer = outer.max((0..3).map(|i| (m[i] - exact[i]).abs()).fold(0.0, f64::max));
    }
    let names = ["oscillation", "transport", "curl_grid", "curl_pointwise", "leibniz", "time_period", "space_period"];
    for (n, w) in names.iter().zip(worst) {
        table.at_most(format!("lambda{lambda}.{n}"), w, tol);
    }
    table.at_most(format!("lambda{lambda}.jet_unit_energy"), energy, tol);
    table.at_most(format!("lambda{lambda}.grid_mean_outer"), outer, tol);

    let pat = TemporalPattern::standard(js.tau, js.sigma, set.len())?;
    let times: Vec<f64> = (0..97).map(|i| 0.003 + i as f64 / 97.0).collect();
    let (mut h_res, mut g_norm, mut h_sup) = (0.0f64, 0.0f64, 0.0f64);
    for k in 0..pat.len() {
        h_res = h_res.max(pat.h_identity_residual(k, &times));
        g_norm = g_norm.max((pat.lgamma_norm(k, 0, 2.0) - 1.0).abs());
        h_sup = h_sup.max(pat.h_sup(k));
    }
    table.at_most(format!("lambda{lambda}.temporal_antiderivative"), h_res, tol);
    table.at_most(format!("lambda{lambda}.temporal_unit_energy"), g_norm, tol);
    table.at_most(format!("lambda{lambda}.h_sup"), h_sup, 1.0);
    let dense: Vec<f64> = (0..20_000).map(|i| i as f64 / 20_000.0).collect();
    table.flag(format!("lambda{lambda}.temporal_supports_disjoint"), pat.supports_disjoint(&dense));

    let prefix = format!("lambda{lambda}.");
    manifest.extend_prefixed(&prefix, scales.manifest_entries());
    manifest.extend_prefixed(&prefix, js.manifest_entries());
    manifest.push(format!("{prefix}grid_n"), grid.n());
    manifest.push(format!("{prefix}identity_band"), grid.n() / 4 - 1);
    Ok(())
}

pub fn run(cfg: &LabConfig) -> Result<Outcome, LabError> {
    cfg.require_desk("identities")?;
    let lambdas = cfg.lambdas_or(&DEFAULT_LAMBDAS);
    let mut manifest = crate::base_manifest("identities", cfg);
    manifest.push("lambdas", join(&lambdas));
    manifest.push("operator_grid_n", cfg.grid_n);
    manifest.push("operator_band", cfg.grid_n / 4);
    manifest.push("operator_trials", cfg.trials);
    manifest.push("geometry_matrices", cfg.matrices);
    manifest.push("block_times", join(&BLOCK_TIMES));

    let mut table = CheckTable::default();
    let op = operator_core(cfg.grid_n, cfg.trials, cfg.seed)?;
    table.at_most("div_inverse_divergence", op.div_inverse_divergence, cfg.tol.operator);
    table.at_most("leray_idempotent", op.leray_idempotent, cfg.tol.projection);
    table.at_most("leray_annihilates_gradients", op.leray_gradient, cfg.tol.projection);
    table.at_most("fractional_laplacian_unit", op.fractional_unit, cfg.tol.projection);

    let set = WavevectorSet::build();
    let geo = geometry_check(&set, cfg.matrices, cfg.seed)?;
    table.at_most("geometry_reconstruction", geo.reconstruction, cfg.tol.geometry);
    table.at_least("geometry_min_coefficient", geo.min_coefficient, f64::MIN_POSITIVE);
    table.flag("geometry_base_coefficients", geo.base_matches);
    manifest.push("geometry_certified_radius", format!("{:e}", set.c_r));
    manifest.push("geometry_n_lambda", set.n_lambda);
    manifest.push("geometry_base", join(&set.decomposition.base));

    for &l in &lambdas {
        block_checks(cfg, l, &mut table, &mut manifest)?;
    }
    let passed = table.passed();
    let summary = crate::summarize(&table);
    Ok(Outcome {
        campaign: "identities".into(),
        artifacts: vec![Artifact::text("identities.csv", table.to_csv()), Artifact::text("wavevectors.csv", set.to_csv())],
        manifest,
        passed,
        summary,
    })
}
