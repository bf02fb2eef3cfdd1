//! Residuals of the defining identities of a jet.
//!
//! Every residual is the sup-norm misfit divided by the larger sup-norm of
//! the two sides. Time derivatives come from the analytic phase; spatial
//! derivatives are spectral on a band where the quadratic products are
//! represented without aliasing.

use gns_torus::ops::{directional, div_outer, perp_gradient};
use gns_torus::{Field, Grid};

use crate::jet::{GridJet, Jet};
use crate::quad::richardson_derivative;
use crate::BlockError;

#[derive(Clone, Debug, PartialEq)]
pub struct JetIdentityReport {
    pub band: i64,
    /// `∂_t|W|²k₁ = μ div(W⊗W)`.
    pub oscillation: f64,
    /// `∂_tΨ = μ(k₁·∇)Ψ`.
    pub transport: f64,
    /// `c^{−1}∇⊥Ψ = W + W^c` on the grid.
    pub curl_grid: f64,
    /// The same relation for the closed forms, by finite differences.
    pub curl_pointwise: f64,
    /// `c^{−1}∇⊥(aΨ) = a(W + W^c) + c^{−1}∇⊥a·Ψ` for a smooth `a`.
    pub leibniz: f64,
    /// `W(t + σ^{−1}) = W(t)`.
    pub time_period: f64,
    /// `W(x + eᵢ/(λr⊥)) = W(x)` for the closed form.
    pub space_period: f64,
}

impl JetIdentityReport {
    pub fn worst(&self) -> f64 {
        [
            self.oscillation,
            self.transport,
            self.curl_grid,
            self.curl_pointwise,
            self.leibniz,
            self.time_period,
            self.space_period,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

pub(crate) fn relative(lhs: &Field, rhs: &Field) -> Result<f64, BlockError> {
    let scale = lhs.sup().max(rhs.sup());
    let diff = lhs.max_abs_diff(rhs)?;
    Ok(if scale > 0.0 { diff / scale } else { diff })
}

/// Checks all identities at the given times on the alias-free band `n/4 − 1`.
pub fn check_jet_identities(jet: &Jet, grid: &Grid, times: &[f64]) -> Result<JetIdentityReport, BlockError> {
    let band = grid.n() as i64 / 4 - 1;
    let gj = GridJet::new(jet, grid, band)?;
    let mu = jet.scales.mu;
    let c = jet.scales.c as f64;
    let period = 1.0 / jet.scales.sigma as f64;
    let mut rep = JetIdentityReport {
        band,
        oscillation: 0.0,
        transport: 0.0,
        curl_grid: 0.0,
        curl_pointwise: 0.0,
        leibniz: 0.0,
        time_period: 0.0,
        space_period: 0.0,
    };
    // A smooth amplitude for the product rule.
    let a = Field::scalar_fn(grid, |x, y| {
        let tp = std::f64::consts::TAU;
        1.5 + (tp * x).cos() * 0.4 + (tp * (x + 2.0 * y)).sin() * 0.3
    });
    for &t in times {
        let amp = gj.w_amplitude(t);
        let amp_dt = gj.w_amplitude_dt(t);
        let w = gj.w(t);
        let lhs = amp.mul_scalar(&amp_dt)?.scale(2.0).times_vector(jet.k1)?;
        let rhs = div_outer(&w, &w)?.scale(mu);
        rep.oscillation = rep.oscillation.max(relative(&lhs, &rhs)?);

        let psi = gj.psi(t);
        let rhs = directional(&psi, jet.k1).scale(mu);
        rep.transport = rep.transport.max(relative(&gj.psi_dt(t), &rhs)?);

        let sum = w.add(&gj.wc(t))?;
        let curl = perp_gradient(&psi)?.scale(1.0 / c);
        rep.curl_grid = rep.curl_grid.max(relative(&curl, &sum)?);

        let lhs = perp_gradient(&a.mul_scalar(&psi)?)?.scale(1.0 / c);
        let rhs = sum.mul_scalar(&a)?.add(&perp_gradient(&a)?.mul_scalar(&psi)?.scale(1.0 / c))?;
        rep.leibniz = rep.leibniz.max(relative(&lhs, &rhs)?);

        rep.time_period = rep.time_period.max(relative(&gj.w(t + period), &w)?);
        let (cw, _, _) = jet.sample(grid, t)?;
        let (cw_shift, _, _) = jet.sample(grid, t + period)?;
        rep.time_period = rep.time_period.max(relative(&cw_shift, &cw)?);

        rep.curl_pointwise = rep.curl_pointwise.max(pointwise_curl(jet, t));
        rep.space_period = rep.space_period.max(space_period(jet, t));
    }
    Ok(rep)
}

/// Phase-space sample points `(s, z)` spread over the jet support.
fn support_points(jet: &Jet) -> Vec<(f64, f64)> {
    let (rl, rp) = (jet.scales.r_par, jet.scales.r_perp);
    let m = 24;
    let mut out = Vec::with_capacity(m * m);
    for i in 0..m {
        for j in 0..m {
            let s = rl * (-0.95 + 1.9 * (i as f64 + 0.5) / m as f64);
            let z = rp * (-0.95 + 1.9 * (j as f64 + 0.37) / m as f64);
            out.push((s, z));
        }
    }
    out
}

/// Worst relative misfit of `c^{−1}∇⊥Ψ = W + W^c` for the closed forms,
/// with eighth-order Richardson central differences of `Ψ`. The time is
/// reduced modulo the phase period first, so the phase stays of order one
/// and its rounding does not enter the difference quotients.
fn pointwise_curl(jet: &Jet, t: f64) -> f64 {
    let cycles = jet.scales.phase_cycles() as f64;
    let t = t - (cycles * t).floor() / cycles;
    let c = jet.scales.c as f64;
    let h = jet.scales.r_perp / c / 200.0;
    let cmu = jet.scales.phase_cycles() as f64;
    let rich = |x: [f64; 2], e: [f64; 2]| richardson_derivative(|s| jet.psi([x[0] + s * e[0], x[1] + s * e[1]], t), 0.0, h);
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for (s, z) in support_points(jet) {
        // x with c k₁·x = s − cμt and c k·x = z.
        let s0 = s - cmu * t;
        let x = [(s0 * jet.k1[0] + z * jet.k[0]) / c, (s0 * jet.k1[1] + z * jet.k[1]) / c];
        let (d1, d2) = (rich(x, [1.0, 0.0]), rich(x, [0.0, 1.0]));
        let lhs = [-d2 / c, d1 / c];
        let (w, wc) = (jet.w(x, t), jet.wc(x, t));
        let rhs = [w[0] + wc[0], w[1] + wc[1]];
        worst = worst.max((lhs[0] - rhs[0]).abs()).max((lhs[1] - rhs[1]).abs());
        scale = scale.max(rhs[0].hypot(rhs[1]));
    }
    worst / scale.max(f64::MIN_POSITIVE)
}

fn space_period(jet: &Jet, t: f64) -> f64 {
    let c = jet.scales.c as f64;
    let shift = 1.0 / jet.scales.lambda_r_perp as f64;
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for (s, z) in support_points(jet) {
        let x = [(s * jet.k1[0] + z * jet.k[0]) / c, (s * jet.k1[1] + z * jet.k[1]) / c];
        let w = jet.w(x, t);
        scale = scale.max(w[0].hypot(w[1]));
        for e in [[shift, 0.0], [0.0, shift]] {
            let v = jet.w([x[0] + e[0], x[1] + e[1]], t);
            worst = worst.max((v[0] - w[0]).abs()).max((v[1] - w[1]).abs());
        }
    }
    worst / scale.max(f64::MIN_POSITIVE)
}
