//! Building-block scales as realized on the torus.
//!
//! Exact periodicity needs three integers: `λr⊥` (so the jet's argument maps
//! `ℤ²` into `ℤ²` for every rational direction), `σ` (so `g_(k)` has whole
//! periods on `[0, 1]`) and `λr⊥N_Λ μ/σ` (so the jet is `σ^{−1}`-periodic in
//! time). Each is rounded down from its nominal value, floored at one, and
//! the dependent scale recomputed.

use gns_params::ScaleSet;

use crate::BlockError;

#[derive(Clone, Debug, PartialEq)]
pub struct JetScales {
    pub lambda: f64,
    pub n_lambda: i64,
    /// The integer `λr⊥`.
    pub lambda_r_perp: i64,
    /// Jet frequency `c = λr⊥N_Λ`.
    pub c: i64,
    pub r_perp: f64,
    pub r_par: f64,
    pub mu: f64,
    pub sigma: i64,
    pub tau: f64,
    /// Nominal values before rounding.
    pub nominal_r_perp: f64,
    pub nominal_mu: f64,
    pub nominal_sigma: f64,
}

impl JetScales {
    pub fn realize(scales: &ScaleSet, n_lambda: i64) -> Result<Self, BlockError> {
        let lambda = scales.lambda;
        let lambda_r_perp = ((lambda * scales.r_perp) + 1e-9).floor().max(1.0) as i64;
        let r_perp = lambda_r_perp as f64 / lambda;
        let c = lambda_r_perp * n_lambda;
        let sigma = (scales.sigma + 1e-9).floor().max(1.0) as i64;
        let cycles = ((c as f64 * scales.mu / sigma as f64).round()).max(1.0);
        let mu = cycles * sigma as f64 / c as f64;
        let out = Self {
            lambda,
            n_lambda,
            lambda_r_perp,
            c,
            r_perp,
            r_par: scales.r_par,
            mu,
            sigma,
            tau: scales.tau,
            nominal_r_perp: scales.r_perp,
            nominal_mu: scales.mu,
            nominal_sigma: scales.sigma,
        };
        if !(out.r_perp < out.r_par && out.r_par <= 0.5) {
            return Err(BlockError::Scale(format!(
                "need r_perp < r_par <= 1/2, got r_perp = {}, r_par = {}",
                out.r_perp, out.r_par
            )));
        }
        if out.tau < 1.0 {
            return Err(BlockError::Scale(format!("temporal concentration tau = {} below 1", out.tau)));
        }
        Ok(out)
    }

    /// Temporal frequency of the jet phase, an integer multiple of `σ`.
    pub fn phase_cycles(&self) -> i64 {
        (self.c as f64 * self.mu).round() as i64
    }

    pub fn manifest_entries(&self) -> Vec<(String, String)> {
        vec![
            ("realized_lambda_r_perp".into(), self.lambda_r_perp.to_string()),
            ("realized_c".into(), self.c.to_string()),
            ("realized_r_perp".into(), format!("{:e}", self.r_perp)),
            ("realized_mu".into(), format!("{:e}", self.mu)),
            ("realized_sigma".into(), self.sigma.to_string()),
            ("realized_tau".into(), format!("{:e}", self.tau)),
        ]
    }
}
