//! Intermittent jets `W_k`, correctors `W_k^c` and potentials `Ψ_k`.
//!
//! With `c = λr⊥N_Λ`, phase `s = c(x_k + μt)` and transverse coordinate
//! `z = c·y_k`,
//!
//! ```text
//! W   = −c_W F(s) G′(z) k₁        F = φ_{r∥},   G′ = (ψ′)_{r⊥}
//! W^c =  c_W (r⊥/r∥) F′(s) G(z) k  F′ = (φ′)_{r∥}, G = ψ_{r⊥}
//! Ψ   =  c_W r⊥ F(s) G(z)
//! ```
//!
//! all periodized with period one in `s` and `z`. The constant `c_W` makes
//! `⨍|W|² = 1`, so `⨍ W⊗W = k₁⊗k₁`. Since `k₁ = (k₂, −k₁)` and
//! `∇⊥ = J∇` with `Jk₁ = k`, `Jk = −k₁`, the curl relation
//! `c^{−1}∇⊥Ψ = W + W^c` holds exactly.

use std::f64::consts::PI;

use gns_geometry::Direction;
use gns_torus::{Field, Grid, Rank, Spectrum};
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::profile::{rescale_profile, Profile, ProfileKind, Rescaled};
use crate::quad::{gauss_legendre, gauss_legendre_nodes};
use crate::scales::JetScales;
use crate::BlockError;

/// Which of the three spatial building blocks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BlockKind {
    Jet,
    Corrector,
    Potential,
}

#[derive(Clone, Debug)]
pub struct Jet {
    pub direction: Direction,
    pub k: [f64; 2],
    pub k1: [f64; 2],
    /// Integer vectors `c·k` and `c·k₁`.
    pub ck: [i64; 2],
    pub ck1: [i64; 2],
    pub scales: JetScales,
    c_w: f64,
    f: [Rescaled; 3],
    g: [Rescaled; 3],
}

fn integer_vec(v: [f64; 2], c: i64) -> Result<[i64; 2], BlockError> {
    let out = [v[0] * c as f64, v[1] * c as f64];
    let r = [out[0].round(), out[1].round()];
    if (out[0] - r[0]).abs() > 1e-9 || (out[1] - r[1]).abs() > 1e-9 {
        return Err(BlockError::Scale(format!("c·k = {out:?} is not an integer vector")));
    }
    Ok([r[0] as i64, r[1] as i64])
}

impl Jet {
    pub fn new(direction: Direction, scales: JetScales, profile: &Profile) -> Result<Self, BlockError> {
        let k = direction.k_f64();
        let k1 = direction.k1_f64();
        let ck = integer_vec(k, scales.c)?;
        let ck1 = integer_vec(k1, scales.c)?;
        let rf = |d| rescale_profile(profile, ProfileKind::Phi, d, scales.r_par);
        let rg = |d| rescale_profile(profile, ProfileKind::Psi, d, scales.r_perp);
        let f = [rf(0)?, rf(1)?, rf(2)?];
        let g = [rg(0)?, rg(1)?, rg(2)?];
        let c_w = 1.0 / (2.0 * PI * profile.psi_prime_sq()).sqrt();
        Ok(Self { direction, k, k1, ck, ck1, scales, c_w, f, g })
    }

    pub fn c_w(&self) -> f64 {
        self.c_w
    }

    /// `(s, z)` at a point, reduced mod 1 through the integer vectors.
    fn phase(&self, x: [f64; 2], t: f64) -> (f64, f64) {
        let s = self.ck1[0] as f64 * x[0] + self.ck1[1] as f64 * x[1] + self.scales.phase_cycles() as f64 * t;
        let z = self.ck[0] as f64 * x[0] + self.ck[1] as f64 * x[1];
        (s - s.floor(), z - z.floor())
    }

    /// `W_k(x, t)` from the closed form.
    pub fn w(&self, x: [f64; 2], t: f64) -> [f64; 2] {
        let (s, z) = self.phase(x, t);
        let a = -self.c_w * self.f[0].eval_periodic(s) * self.g[1].eval_periodic(z);
        [a * self.k1[0], a * self.k1[1]]
    }

    pub fn wc(&self, x: [f64; 2], t: f64) -> [f64; 2] {
        let (s, z) = self.phase(x, t);
        let a = self.c_w * self.scales.r_perp / self.scales.r_par * self.f[1].eval_periodic(s) * self.g[0].eval_periodic(z);
        [a * self.k[0], a * self.k[1]]
    }

    pub fn psi(&self, x: [f64; 2], t: f64) -> f64 {
        let (s, z) = self.phase(x, t);
        self.c_w * self.scales.r_perp * self.f[0].eval_periodic(s) * self.g[0].eval_periodic(z)
    }

    /// Closed-form samples `(W, W^c, Ψ)`. Needs `n ≥ 4λ`.
    pub fn sample(&self, grid: &Grid, t: f64) -> Result<(Field, Field, Field), BlockError> {
        let need = (4.0 * self.scales.lambda).ceil() as usize;
        if grid.n() < need {
            return Err(BlockError::UnderResolved { n: grid.n(), required: need.next_power_of_two() });
        }
        let w = Field::from_fn(grid, Rank::Vector, |a, b| self.w([a, b], t));
        let wc = Field::from_fn(grid, Rank::Vector, |a, b| self.wc([a, b], t));
        let psi = Field::scalar_fn(grid, |a, b| self.psi([a, b], t));
        Ok((w, wc, psi))
    }

    /// `(κ, i, j)` with block `= κ·F_i(s)·G_j(z)`, where `F_i`, `G_j` are
    /// the rescaled `i`-th and `j`-th derivative profiles.
    fn factors(&self, kind: BlockKind) -> (f64, usize, usize) {
        let (rp, rl) = (self.scales.r_perp, self.scales.r_par);
        match kind {
            BlockKind::Jet => (self.c_w, 0, 1),
            BlockKind::Corrector => (self.c_w * rp / rl, 1, 0),
            BlockKind::Potential => (self.c_w * rp, 0, 0),
        }
    }

    /// `d/ds` of `F_i` is `r∥^{−1}F_{i+1}`; likewise in `z` with `r⊥`.
    fn a(&self, i: usize, d: usize, s: f64) -> f64 {
        self.f[i + d].eval_periodic(s) * self.scales.r_par.powi(-(d as i32))
    }

    fn b(&self, j: usize, d: usize, z: f64) -> f64 {
        self.g[j + d].eval_periodic(z) * self.scales.r_perp.powi(-(d as i32))
    }

    /// Pointwise magnitude of `∇^N ∂_t^M` of a block at phase `(s, z)`,
    /// for `N + M ≤ 1`. Gradients use the Frobenius norm; `∂_t = cμ ∂_s`
    /// and `∇ = c(k₁∂_s + k∂_z)`.
    pub fn magnitude(&self, kind: BlockKind, n: u32, m: u32, s: f64, z: f64) -> f64 {
        let c = self.scales.c as f64;
        let cmu = self.scales.phase_cycles() as f64;
        let (k, i, j) = self.factors(kind);
        match (n, m) {
            (0, 0) => (k * self.a(i, 0, s) * self.b(j, 0, z)).abs(),
            (0, 1) => (k * cmu * self.a(i, 1, s) * self.b(j, 0, z)).abs(),
            (1, 0) => k.abs() * c * (self.a(i, 1, s) * self.b(j, 0, z)).hypot(self.a(i, 0, s) * self.b(j, 1, z)),
            _ => panic!("block derivatives with N + M > 1 are not provided"),
        }
    }

    /// `‖∇^N ∂_t^M block‖_{C_t L^p_x}`, exact up to quadrature.
    ///
    /// The integer map `x ↦ (c k₁·x, c k·x)` preserves Lebesgue measure on
    /// the torus, so the spatial integral equals the integral over the
    /// fundamental domain in `(s, z)`. The result is independent of `t`.
    pub fn norm(&self, kind: BlockKind, n: u32, m: u32, p: f64) -> Result<f64, BlockError> {
        if n + m > 1 {
            return Err(BlockError::Scale(format!("derivative orders N = {n}, M = {m} not provided")));
        }
        if !(p >= 1.0) {
            return Err(BlockError::Scale(format!("Lebesgue exponent {p} below 1")));
        }
        let (rl, rp) = (self.scales.r_par, self.scales.r_perp);
        let one = |f: &dyn Fn(f64) -> f64, r: f64| -> f64 {
            if p.is_infinite() {
                let k = 20_000;
                (0..=k).map(|i| f(r * (-1.0 + 2.0 * i as f64 / k as f64)).abs()).fold(0.0, f64::max)
            } else {
                gauss_legendre(|x| f(x).abs().powf(p), -r, r, 256).powf(1.0 / p)
            }
        };
        if n == 0 {
            // Separable into one-dimensional norms.
            let (k, i, j) = self.factors(kind);
            let cmu = (self.scales.phase_cycles() as f64).powi(m as i32);
            let a = one(&|s| self.a(i, m as usize, s), rl);
            let b = one(&|z| self.b(j, 0, z), rp);
            return Ok(k.abs() * cmu * a * b);
        }
        let sn = gauss_legendre_nodes(-rl, rl, 64);
        let zn = gauss_legendre_nodes(-rp, rp, 64);
        if p.is_infinite() {
            let mut best = 0.0f64;
            for &(s, _) in &sn {
                for &(z, _) in &zn {
                    best = best.max(self.magnitude(kind, n, m, s, z));
                }
            }
            return Ok(best);
        }
        let mut total = 0.0;
        for &(s, ws) in &sn {
            let row: f64 = zn.iter().map(|&(z, wz)| wz * self.magnitude(kind, n, m, s, z).powf(p)).sum();
            total += ws * row;
        }
        Ok(total.powf(1.0 / p))
    }
}

/// Fourier coefficients `f̂(m) = ∫₀¹ f e^{−2πims}` for `|m| ≤ mmax`, from a
/// fine FFT of the periodic samples.
fn coefficients(f: &Rescaled, mmax: usize) -> Vec<Complex64> {
    let m = (8 * mmax).next_power_of_two().max(1 << 14);
    let mut buf: Vec<Complex64> = (0..m).map(|j| Complex64::new(f.eval_periodic(j as f64 / m as f64), 0.0)).collect();
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    let scale = 1.0 / m as f64;
    (-(mmax as i64)..=mmax as i64).map(|k| buf[k.rem_euclid(m as i64) as usize] * scale).collect()
}

#[derive(Clone, Debug)]
struct JetMode {
    idx: usize,
    m: i64,
    w: Complex64,
    wc: Complex64,
    psi: Complex64,
}

/// A jet projected onto the box `max|ξᵢ| ≤ band` of a grid, renormalized so
/// that `⨍|W|² = 1` still holds exactly.
///
/// The projection is a Fourier multiplier commuting with translations, so
/// `W(t) = W(0)(· + μt k₁)` and the curl relation survive it unchanged.
#[derive(Clone, Debug)]
pub struct GridJet {
    pub jet: Jet,
    pub grid: Grid,
    pub band: i64,
    c_wj: f64,
    retained_energy: f64,
    modes: Vec<JetMode>,
    mean_outer: [f64; 3],
}

impl GridJet {
    pub fn new(jet: &Jet, grid: &Grid, band: i64) -> Result<Self, BlockError> {
        let lim = grid.n() as i64 / 2 - 1;
        if band < 1 || band > lim {
            return Err(BlockError::Band { band, limit: lim });
        }
        let c = jet.scales.c;
        let mmax = ((band as f64 * 2f64.sqrt()) / c as f64).ceil() as i64 + 1;
        let fh = coefficients(&jet.f[0], mmax as usize);
        let fph = coefficients(&jet.f[1], mmax as usize);
        let gh = coefficients(&jet.g[0], mmax as usize);
        let gph = coefficients(&jet.g[1], mmax as usize);
        let at = |v: &[Complex64], k: i64| v[(k + mmax) as usize];
        let n = grid.n();
        let (rp, rl) = (jet.scales.r_perp, jet.scales.r_par);
        let mut modes = Vec::new();
        let mut energy = 0.0;
        for m in -mmax..=mmax {
            for q in -mmax..=mmax {
                let xi = [m * jet.ck1[0] + q * jet.ck[0], m * jet.ck1[1] + q * jet.ck[1]];
                if xi[0].abs() > band || xi[1].abs() > band {
                    continue;
                }
                let w = at(&fh, m) * at(&gph, q);
                energy += w.norm_sqr();
                modes.push(JetMode {
                    idx: grid.index_of(xi[0]) * n + grid.index_of(xi[1]),
                    m,
                    w,
                    wc: at(&fph, m) * at(&gh, q) * (rp / rl),
                    psi: at(&fh, m) * at(&gh, q) * rp,
                });
            }
        }
        if energy <= 0.0 {
            return Err(BlockError::Band { band, limit: lim });
        }
        let c_wj = 1.0 / energy.sqrt();
        let mut gj = Self {
            jet: jet.clone(),
            grid: grid.clone(),
            band,
            c_wj,
            retained_energy: energy * jet.c_w * jet.c_w,
            modes,
            mean_outer: [0.0; 3],
        };
        let w = gj.w(0.0);
        let m = |a: &Field, b: &Field| a.mul_scalar(b).map(|f| f.mean()[0]).unwrap_or(f64::NAN);
        let (w1, w2) = (w.component_field(0), w.component_field(1));
        gj.mean_outer = [m(&w1, &w1), m(&w1, &w2), m(&w2, &w2)];
        Ok(gj)
    }

    /// Share of the exact jet's energy inside the band, before renormalizing.
    pub fn retained_energy(&self) -> f64 {
        self.retained_energy
    }

    pub fn normalization(&self) -> f64 {
        self.c_wj
    }

    /// `⨍ W⊗W` as `(m₁₁, m₁₂, m₂₂)`, computed once by grid quadrature.
    pub fn mean_outer(&self) -> [f64; 3] {
        self.mean_outer
    }

    fn scalar(&self, t: f64, dt: bool, pick: impl Fn(&JetMode) -> Complex64) -> Field {
        let p = self.jet.scales.phase_cycles() as f64;
        let mut s = Spectrum::zeros(&self.grid, Rank::Scalar);
        let data = s.comp_mut(0);
        for md in &self.modes {
            let arg = 2.0 * PI * md.m as f64 * p * t;
            let mut z = pick(md) * Complex64::from_polar(self.c_wj, arg);
            if dt {
                z *= Complex64::new(0.0, 2.0 * PI * md.m as f64 * p);
            }
            data[md.idx] += z;
        }
        s.to_field()
    }

    /// Scalar `a` with `W = a·k₁`.
    pub fn w_amplitude(&self, t: f64) -> Field {
        self.scalar(t, false, |m| -m.w)
    }

    /// `∂_t` of [`Self::w_amplitude`], from the analytic phase.
    pub fn w_amplitude_dt(&self, t: f64) -> Field {
        self.scalar(t, true, |m| -m.w)
    }

    /// Scalar `b` with `W^c = b·k`.
    pub fn wc_amplitude(&self, t: f64) -> Field {
        self.scalar(t, false, |m| m.wc)
    }

    pub fn w(&self, t: f64) -> Field {
        self.w_amplitude(t).times_vector(self.jet.k1).expect("scalar amplitude")
    }

    pub fn wc(&self, t: f64) -> Field {
        self.wc_amplitude(t).times_vector(self.jet.k).expect("scalar amplitude")
    }

    pub fn psi(&self, t: f64) -> Field {
        self.scalar(t, false, |m| m.psi)
    }

    pub fn psi_dt(&self, t: f64) -> Field {
        self.scalar(t, true, |m| m.psi)
    }
}
