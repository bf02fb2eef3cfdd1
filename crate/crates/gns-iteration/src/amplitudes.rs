//! Amplitudes `a_(k) = ρ^{1/2} f_u γ_(k)(Id − R̊*_ℓ/ρ)` with
//! `ρ = 2δ C_R^{−1} χ(|R̊*_ℓ|/δ)`.

use gns_geometry::WavevectorSet;
use gns_torus::{Field, Grid};
use rayon::prelude::*;

use crate::util::relative_to;
use crate::{IterationError, Result};

fn psi(s: f64) -> f64 {
    if s > 0.0 {
        (-1.0 / s).exp()
    } else {
        0.0
    }
}

/// Smooth monotone step, `0` for `x ≤ 0` and `1` for `x ≥ 1`.
pub fn smooth_step(x: f64) -> f64 {
    let (a, b) = (psi(x), psi(1.0 - x));
    a / (a + b)
}

/// Derivative of [`smooth_step`].
pub fn smooth_step_dt(x: f64) -> f64 {
    let (a, b) = (psi(x), psi(1.0 - x));
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let (da, db) = (a / (x * x), b / ((1.0 - x) * (1.0 - x)));
    (da * b + a * db) / ((a + b) * (a + b))
}

/// The cut-off `χ`: `1` on `[0, 1]`, `z` on `[2, ∞)`, and the blend
/// `(1 − β(z − 1)) + β(z − 1)z` in between, with `β` the smooth step.
pub fn chi(z: f64) -> f64 {
    let b = smooth_step(z - 1.0);
    (1.0 - b) + b * z
}

pub fn chi_dt(z: f64) -> f64 {
    smooth_step_dt(z - 1.0) * (z - 1.0) + smooth_step(z - 1.0)
}

/// `f_u`: one on `[start, end]`, zero outside the `ramp`-neighbourhood, with
/// smooth-step transitions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeCutoff {
    pub start: f64,
    pub end: f64,
    pub ramp: f64,
}

impl TimeCutoff {
    pub fn value(&self, t: f64) -> f64 {
        let up = smooth_step((t - (self.start - self.ramp)) / self.ramp);
        let down = smooth_step(((self.end + self.ramp) - t) / self.ramp);
        up * down
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let (x, y) = ((t - (self.start - self.ramp)) / self.ramp, ((self.end + self.ramp) - t) / self.ramp);
        (smooth_step_dt(x) * smooth_step(y) - smooth_step(x) * smooth_step_dt(y)) / self.ramp
    }

    /// The closed interval outside which `f_u` vanishes.
    pub fn support(&self) -> (f64, f64) {
        (self.start - self.ramp, self.end + self.ramp)
    }
}

#[derive(Clone, Debug)]
pub struct AmplitudeSet {
    pub t: f64,
    pub delta: f64,
    pub c_r: f64,
    pub f_u: f64,
    pub rho: Field,
    /// `χ(|R̊*_ℓ|/δ)` pointwise.
    pub chi: Field,
    pub a: Vec<Field>,
}

/// Pointwise invariants of an [`AmplitudeSet`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AmplitudeInvariants {
    /// `min ρ / (δ/C_R)`, at least one.
    pub floor: f64,
    /// `max |R̊*_ℓ/ρ| / C_R`, at most one.
    pub ratio: f64,
    /// Relative misfit of `Σ a_(k)² k₁⊗k₁ = ρf_u²Id − f_u²R̊*_ℓ`.
    pub reconstruction: f64,
}

/// Evaluates the amplitudes for the stress `r_star` at one time.
pub fn build_amplitudes(r_star: &Field, t: f64, f_u: f64, delta: f64, set: &WavevectorSet) -> Result<AmplitudeSet> {
    if !(delta > 0.0) {
        return Err(IterationError::Construction { t, msg: format!("stress scale {delta} must be positive") });
    }
    let grid = r_star.grid().clone();
    let c_r = set.c_r;
    let (r11, r12) = (r_star.comp(0), r_star.comp(1));
    let points: Vec<std::result::Result<(f64, f64, Vec<f64>), String>> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let mag = std::f64::consts::SQRT_2 * r11[i].hypot(r12[i]);
            let c = chi(mag / delta);
            let rho = 2.0 * delta / c_r * c;
            let m = [1.0 - r11[i] / rho, -r12[i] / rho, 1.0 + r11[i] / rho];
            let g = set.gammas(&m).map_err(|e| e.to_string())?;
            let s = rho.sqrt() * f_u;
            Ok((rho, c, g.into_iter().map(|g| s * g).collect()))
        })
        .collect();
    let n = set.len();
    let mut rho = Vec::with_capacity(grid.len());
    let mut chi_v = Vec::with_capacity(grid.len());
    let mut a = vec![Vec::with_capacity(grid.len()); n];
    for p in points {
        let (r, c, g) = p.map_err(|msg| IterationError::Construction { t, msg })?;
        rho.push(r);
        chi_v.push(c);
        for (k, v) in g.into_iter().enumerate() {
            a[k].push(v);
        }
    }
    let scalar = |v: Vec<f64>| Field::scalar(&grid, v);
    Ok(AmplitudeSet {
        t,
        delta,
        c_r,
        f_u,
        rho: scalar(rho)?,
        chi: scalar(chi_v)?,
        a: a.into_iter().map(scalar).collect::<std::result::Result<_, _>>()?,
    })
}

impl AmplitudeSet {
    pub fn grid(&self) -> &Grid {
        self.rho.grid()
    }

    pub fn invariants(&self, r_star: &Field, set: &WavevectorSet) -> AmplitudeInvariants {
        let rho = self.rho.comp(0);
        let (r11, r12) = (r_star.comp(0), r_star.comp(1));
        let f2 = self.f_u * self.f_u;
        let dirs: Vec<[f64; 2]> = set.directions.iter().map(|d| d.k1_f64()).collect();
        let (mut floor, mut ratio, mut diff, mut scale) = (f64::INFINITY, 0.0f64, 0.0f64, 0.0f64);
        for i in 0..rho.len() {
            floor = floor.min(rho[i] * self.c_r / self.delta);
            let mag = std::f64::consts::SQRT_2 * r11[i].hypot(r12[i]);
            ratio = ratio.max(mag / rho[i] / self.c_r);
            let mut lhs = [0.0; 3];
            for (k, d) in dirs.iter().enumerate() {
                let a2 = self.a[k].comp(0)[i].powi(2);
                lhs[0] += a2 * d[0] * d[0];
                lhs[1] += a2 * d[0] * d[1];
                lhs[2] += a2 * d[1] * d[1];
            }
            let rhs = [f2 * (rho[i] - r11[i]), -f2 * r12[i], f2 * (rho[i] + r11[i])];
            let e = [lhs[0] - rhs[0], lhs[1] - rhs[1], lhs[2] - rhs[2]];
            diff = diff.max(gns_geometry::frobenius(&e));
            scale = scale.max(gns_geometry::frobenius(&rhs));
        }
        AmplitudeInvariants { floor, ratio, reconstruction: relative_to(diff, scale) }
    }
}

/// `∂_t a_(k)` by the chain rule from `∂_t R̊*_ℓ` and `∂_t f_u`, using that
/// each `γ_(k)²` is affine in the matrix argument.
pub fn amplitude_rates(
    amps: &AmplitudeSet,
    r_star: &Field,
    r_star_dt: &Field,
    f_u_dt: f64,
    set: &WavevectorSet,
) -> Result<Vec<Field>> {
    let grid = r_star.grid().clone();
    let (r11, r12) = (r_star.comp(0), r_star.comp(1));
    let (d11, d12) = (r_star_dt.comp(0), r_star_dt.comp(1));
    let rho = amps.rho.comp(0);
    let (delta, c_r, f) = (amps.delta, amps.c_r, amps.f_u);
    let n = set.len();
    let rates: Vec<std::result::Result<Vec<f64>, String>> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let mag = std::f64::consts::SQRT_2 * r11[i].hypot(r12[i]);
            let rho_t = if mag > 0.0 {
                let mag_t = 2.0 * (r11[i] * d11[i] + r12[i] * d12[i]) / mag;
                2.0 * c_r.recip() * chi_dt(mag / delta) * mag_t
            } else {
                0.0
            };
            let p = rho[i];
            let m = [1.0 - r11[i] / p, -r12[i] / p, 1.0 + r11[i] / p];
            let m11_t = -d11[i] / p + r11[i] * rho_t / (p * p);
            let m12_t = -d12[i] / p + r12[i] * rho_t / (p * p);
            let g2 = set.decompose(&m).map_err(|e| e.to_string())?;
            let g2_t = set.decomposition.slope(&[m11_t, m12_t, -m11_t]);
            let sq = p.sqrt();
            Ok((0..n)
                .map(|k| {
                    let g = g2[k].sqrt();
                    sq * g * f_u_dt + f * sq * g * (0.5 * rho_t / p + 0.5 * g2_t[k] / g2[k])
                })
                .collect())
        })
        .collect();
    let mut out = vec![Vec::with_capacity(grid.len()); n];
    for r in rates {
        let r = r.map_err(|msg| IterationError::Construction { t: amps.t, msg })?;
        for (k, v) in r.into_iter().enumerate() {
            out[k].push(v);
        }
    }
    out.into_iter().map(|v| Ok(Field::scalar(&grid, v)?)).collect()
}
