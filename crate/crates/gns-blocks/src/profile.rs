//! The compactly supported profiles `φ`, `ψ` and their rescalings.

use std::f64::consts::PI;

use crate::quad::gauss_legendre;
use crate::BlockError;

/// `d`-th derivative (`d ≤ 3`) of `exp(−s/(1−x²))`, zero off `(−1, 1)`.
pub fn bump_derivative(s: f64, x: f64, d: usize) -> f64 {
    if x.abs() >= 1.0 {
        return 0.0;
    }
    let u = 1.0 - x * x;
    let f = (-s / u).exp();
    if f == 0.0 {
        return 0.0;
    }
    // θ = −1/u and its first three derivatives.
    let t1 = -2.0 * x / (u * u);
    let t2 = -2.0 / (u * u) - 8.0 * x * x / (u * u * u);
    let t3 = -24.0 * x / (u * u * u) - 48.0 * x * x * x / (u * u * u * u);
    match d {
        0 => f,
        1 => f * s * t1,
        2 => f * (s * s * t1 * t1 + s * t2),
        3 => f * (s * s * s * t1 * t1 * t1 + 3.0 * s * s * t1 * t2 + s * t3),
        _ => panic!("bump derivative of order {d} not available"),
    }
}

const NORM_PANELS: usize = 512;

/// `φ = A·(b₁)′` and `ψ = B·(b₂)′` with `b_s = exp(−s/(1−x²))`.
///
/// Both are mean-free with support in `[−1, 1]`, and `A`, `B` make
/// `(1/2π)∫φ² = (1/2π)∫ψ² = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Profile {
    a_phi: f64,
    a_psi: f64,
    psi_prime_sq: f64,
}

const S_PHI: f64 = 1.0;
const S_PSI: f64 = 2.0;

pub fn make_profiles() -> Profile {
    let raw = |s: f64| gauss_legendre(|x| bump_derivative(s, x, 1).powi(2), -1.0, 1.0, NORM_PANELS);
    let a_phi = (2.0 * PI / raw(S_PHI)).sqrt();
    let a_psi = (2.0 * PI / raw(S_PSI)).sqrt();
    let psi_prime_sq = a_psi * a_psi * gauss_legendre(|x| bump_derivative(S_PSI, x, 2).powi(2), -1.0, 1.0, NORM_PANELS);
    Profile { a_phi, a_psi, psi_prime_sq }
}

impl Profile {
    /// `φ^{(d)}(x)` for `d ≤ 2`.
    pub fn phi(&self, x: f64, d: usize) -> f64 {
        self.a_phi * bump_derivative(S_PHI, x, d + 1)
    }

    /// `ψ^{(d)}(x)` for `d ≤ 2`.
    pub fn psi(&self, x: f64, d: usize) -> f64 {
        self.a_psi * bump_derivative(S_PSI, x, d + 1)
    }

    /// `∫ψ′²`, which fixes the jet normalization.
    pub fn psi_prime_sq(&self) -> f64 {
        self.psi_prime_sq
    }
}

/// Which profile a rescaled evaluator draws from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProfileKind {
    Phi,
    Psi,
}

/// `f_r(x) = r^{−1/2} f^{(d)}(x/r)`, the L²-invariant rescaling of the
/// `d`-th derivative of a profile. Note `(f_r)′ = r^{−1} (f′)_r`.
#[derive(Clone, Debug, PartialEq)]
pub struct Rescaled {
    profile: Profile,
    kind: ProfileKind,
    deriv: usize,
    r: f64,
}

pub fn rescale_profile(profile: &Profile, kind: ProfileKind, deriv: usize, r: f64) -> Result<Rescaled, BlockError> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(BlockError::Scale(format!("rescaling radius {r} outside (0, 1]")));
    }
    if deriv > 2 {
        return Err(BlockError::Scale(format!("profile derivative {deriv} not available")));
    }
    Ok(Rescaled { profile: profile.clone(), kind, deriv, r })
}

impl Rescaled {
    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn eval(&self, x: f64) -> f64 {
        let y = x / self.r;
        let v = match self.kind {
            ProfileKind::Phi => self.profile.phi(y, self.deriv),
            ProfileKind::Psi => self.profile.psi(y, self.deriv),
        };
        v / self.r.sqrt()
    }

    /// The one-periodic extension, valid for `r ≤ 1/2`.
    pub fn eval_periodic(&self, x: f64) -> f64 {
        self.eval(x - x.round())
    }

    /// `‖f_r‖_{L^p(ℝ)}` by composite Gauss–Legendre on the support.
    pub fn lp_norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            let m = 20_000;
            return (0..=m).map(|i| self.eval(self.r * (-1.0 + 2.0 * i as f64 / m as f64)).abs()).fold(0.0, f64::max);
        }
        gauss_legendre(|x| self.eval(x).abs().powf(p), -self.r, self.r, NORM_PANELS).powf(1.0 / p)
    }
}
