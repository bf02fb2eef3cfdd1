//! Temporal intermittency: the concentrated oscillators `g_(k)` and their
//! mean-corrected antiderivatives `h_(k)`, on the time window `[0, 1]`.
//!
//! A mean-free bump `g` of support length `L` is shifted to `g_k = g(· − t_k)`,
//! concentrated as `g_{k,τ}(t) = τ^{1/2} g_k(τt)` on `[0, 1)` and extended
//! with period one, then oscillated: `g_(k)(t) = g_{k,τ}(σt)`. With `σ` an
//! integer, `∫₀¹ g_(k)² = 1` exactly.

use crate::profile::bump_derivative;
use crate::quad::{gauss_legendre, gauss_legendre_nodes, richardson_derivative};
use crate::BlockError;

const TABLE_PANELS: usize = 256;

#[derive(Clone, Debug, PartialEq)]
pub struct TemporalPattern {
    pub tau: f64,
    pub sigma: i64,
    pub support: f64,
    pub shifts: Vec<f64>,
    amp: f64,
    /// `∫₀^{v} g²` at the panel boundaries `v = iL/P`.
    cumulative: Vec<f64>,
}

/// Builds the pattern for the given shifts and base support length.
pub fn make_temporal(tau: f64, sigma: i64, shifts: Vec<f64>, support: f64) -> Result<TemporalPattern, BlockError> {
    if !(tau >= 1.0) || sigma < 1 || !(support > 0.0) {
        return Err(BlockError::Scale(format!("need tau >= 1, sigma >= 1, support > 0; got {tau}, {sigma}, {support}")));
    }
    let mut clashes = Vec::new();
    for (i, a) in shifts.iter().enumerate() {
        if *a < 0.0 || a + support > 1.0 {
            clashes.push(format!("shift {i} leaves [0, 1]"));
        }
        for (j, b) in shifts.iter().enumerate().skip(i + 1) {
            if (a - b).abs() < support {
                clashes.push(format!("({i}, {j})"));
            }
        }
    }
    if !clashes.is_empty() {
        return Err(BlockError::Overlap(clashes.join(", ")));
    }
    let raw = gauss_legendre(|x| bump_derivative(1.0, x, 1).powi(2), -1.0, 1.0, 512);
    let amp = (2.0 / (support * raw)).sqrt();
    let mut pat = TemporalPattern { tau, sigma, support, shifts, amp, cumulative: vec![0.0] };
    let h = support / TABLE_PANELS as f64;
    let mut acc = 0.0;
    for i in 0..TABLE_PANELS {
        let a = i as f64 * h;
        acc += gauss_legendre(|s| pat.base(s, 0).powi(2), a, a + h, 1);
        pat.cumulative.push(acc);
    }
    Ok(pat)
}

impl TemporalPattern {
    /// `|Λ|` shifts `i/|Λ|` with base support `1/(4|Λ|)`.
    pub fn standard(tau: f64, sigma: i64, count: usize) -> Result<Self, BlockError> {
        let shifts = (0..count).map(|i| i as f64 / count as f64).collect();
        make_temporal(tau, sigma, shifts, 1.0 / (4.0 * count as f64))
    }

    pub fn len(&self) -> usize {
        self.shifts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shifts.is_empty()
    }

    /// `M`-th derivative (`M ≤ 2`) of the unshifted bump on `[0, L]`.
    fn base(&self, s: f64, m: usize) -> f64 {
        let l = self.support;
        self.amp * (2.0 / l).powi(m as i32) * bump_derivative(1.0, 2.0 * s / l - 1.0, m + 1)
    }

    /// `∫₀^v g²` for the unshifted bump.
    fn base_cumulative(&self, v: f64) -> f64 {
        if v <= 0.0 {
            return 0.0;
        }
        if v >= self.support {
            return *self.cumulative.last().expect("table");
        }
        let h = self.support / TABLE_PANELS as f64;
        let i = ((v / h).floor() as usize).min(TABLE_PANELS - 1);
        let a = i as f64 * h;
        self.cumulative[i] + gauss_legendre(|s| self.base(s, 0).powi(2), a, v, 1)
    }

    /// Position inside the concentrated window: `τ·frac(σt)`.
    fn window(&self, t: f64) -> f64 {
        let u = self.sigma as f64 * t;
        self.tau * (u - u.floor())
    }

    /// `∂_t^M g_(k)(t)` for `M ≤ 2`.
    pub fn g_deriv(&self, k: usize, t: f64, m: usize) -> f64 {
        let s = self.window(t) - self.shifts[k];
        if s <= 0.0 || s >= self.support {
            return 0.0;
        }
        self.tau.sqrt() * (self.tau * self.sigma as f64).powi(m as i32) * self.base(s, m)
    }

    pub fn g(&self, k: usize, t: f64) -> f64 {
        self.g_deriv(k, t, 0)
    }

    /// `h_(k)(t) = h_{k,τ}(σt)` with `h_{k,τ}(t) = ∫₀ᵗ (g_{k,τ}² − 1)`.
    pub fn h(&self, k: usize, t: f64) -> f64 {
        let u = self.sigma as f64 * t;
        let frac = u - u.floor();
        self.base_cumulative(self.tau * frac - self.shifts[k]) - frac
    }

    /// Support intervals of `g_(k)` inside `[0, 1]`, one per period.
    pub fn support_intervals(&self, k: usize) -> Vec<(f64, f64)> {
        let sg = self.sigma as f64;
        (0..self.sigma)
            .map(|j| {
                let a = (j as f64 + self.shifts[k] / self.tau) / sg;
                let b = (j as f64 + (self.shifts[k] + self.support) / self.tau) / sg;
                (a, b)
            })
            .collect()
    }

    /// Gauss–Legendre nodes covering the supports of `g_(k)`.
    pub fn support_nodes(&self, k: usize, panels: usize) -> Vec<(f64, f64)> {
        self.support_intervals(k).into_iter().flat_map(|(a, b)| gauss_legendre_nodes(a, b, panels)).collect()
    }

    /// `‖∂_t^M g_(k)‖_{L^γ(0,1)}` by quadrature over the supports.
    pub fn lgamma_norm(&self, k: usize, m: usize, gamma: f64) -> f64 {
        if gamma.is_infinite() {
            return self
                .support_intervals(k)
                .iter()
                .flat_map(|&(a, b)| (0..=4000).map(move |i| a + (b - a) * i as f64 / 4000.0))
                .map(|t| self.g_deriv(k, t, m).abs())
                .fold(0.0, f64::max);
        }
        let s: f64 = self.support_nodes(k, 64).iter().map(|&(t, w)| w * self.g_deriv(k, t, m).abs().powf(gamma)).sum();
        s.powf(1.0 / gamma)
    }

    /// `sup_t |h_(k)|` over a dense sample of one period.
    pub fn h_sup(&self, k: usize) -> f64 {
        let m = 20_000;
        (0..m).map(|i| self.h(k, i as f64 / (m as f64 * self.sigma as f64)).abs()).fold(0.0, f64::max)
    }

    /// Worst relative residual of `∂_t(σ^{−1}h_(k)) = g_(k)² − 1` at the
    /// given times. With `w = τ·frac(σt) − shift` the left side is
    /// `τ·∂_w∫₀^w g_{k,τ}² − 1`, and the `w`-derivative is taken by
    /// Richardson-extrapolated central differences of the cumulative table,
    /// which keeps the rounding of the large argument out of the quotient.
    pub fn h_identity_residual(&self, k: usize, times: &[f64]) -> f64 {
        let step = self.support / 1000.0;
        let scale = self.g_sup_sq(k);
        times
            .iter()
            .map(|&t| {
                let w = self.window(t) - self.shifts[k];
                let lhs = self.tau * richardson_derivative(|v| self.base_cumulative(v), w, step) - 1.0;
                (lhs - (self.g(k, t).powi(2) - 1.0)).abs() / scale
            })
            .fold(0.0, f64::max)
    }

    fn g_sup_sq(&self, k: usize) -> f64 {
        self.lgamma_norm(k, 0, f64::INFINITY).powi(2)
    }

    /// `true` if `g_(k)·g_(k′) = 0` at every sample for all `k ≠ k′`.
    pub fn supports_disjoint(&self, times: &[f64]) -> bool {
        times.iter().all(|&t| {
            let live = (0..self.len()).filter(|&k| self.g(k, t) != 0.0).count();
            live <= 1
        })
    }
}
