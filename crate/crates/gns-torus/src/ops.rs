//! Spectral differential operators and projections.
//!
//! Derivatives use the symbol `2πiκ` with `κ` the signed wavenumber, set to
//! zero on the Nyquist line. Every identity below (`div ∇⊥ = 0`,
//! `div ℛ = id`, `(−Δ)¹ = −Δ`) therefore holds mode by mode.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::field::expect_rank;
use crate::{Field, Grid, Rank, Spectrum, TorusError};

const TWO_PI: f64 = 2.0 * PI;

/// Per-mode data handed to multiplier closures.
#[derive(Clone, Copy, Debug)]
pub struct Mode {
    /// Signed integer frequency.
    pub xi: [i64; 2],
    /// Differentiation symbol (zero on the Nyquist line).
    pub kappa: [f64; 2],
}

impl Mode {
    pub fn kappa_sq(&self) -> f64 {
        self.kappa[0] * self.kappa[0] + self.kappa[1] * self.kappa[1]
    }

    pub fn xi_norm(&self) -> f64 {
        ((self.xi[0] * self.xi[0] + self.xi[1] * self.xi[1]) as f64).sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.xi == [0, 0]
    }

    /// A nonzero frequency that the grid cannot differentiate.
    pub fn is_unresolved(&self) -> bool {
        !self.is_zero() && self.kappa == [0.0, 0.0]
    }

    /// `2πiκ_a`.
    pub fn d(&self, a: usize) -> Complex64 {
        Complex64::new(0.0, TWO_PI * self.kappa[a])
    }

    /// Symbol of `Δ`: `−4π²|κ|²`.
    pub fn lap(&self) -> f64 {
        -TWO_PI * TWO_PI * self.kappa_sq()
    }

    /// Symbol of `Δ⁻¹`, zero where `Δ` vanishes.
    pub fn inv_lap(&self) -> f64 {
        let l = self.lap();
        if l == 0.0 {
            0.0
        } else {
            1.0 / l
        }
    }
}

fn mode(grid: &Grid, idx: usize) -> Mode {
    let n = grid.n();
    let (i, j) = (idx / n, idx % n);
    Mode { xi: [grid.wavenumber(i), grid.wavenumber(j)], kappa: [grid.kappa(i), grid.kappa(j)] }
}

/// Applies a per-mode linear map from the input components to `out_rank`
/// components.
pub fn multiplier<F>(s: &Spectrum, out_rank: Rank, f: F) -> Spectrum
where
    F: Fn(&Mode, &[Complex64]) -> [Complex64; 2] + Sync,
{
    let grid = s.grid().clone();
    let nin = s.rank().components();
    let nout = out_rank.components();
    let vals: Vec<[Complex64; 2]> = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let mut inp = [Complex64::default(); 2];
            for (c, v) in inp.iter_mut().enumerate().take(nin) {
                *v = s.comp(c)[idx];
            }
            f(&mode(&grid, idx), &inp[..nin])
        })
        .collect();
    let comps = (0..nout).map(|c| vals.iter().map(|v| v[c]).collect()).collect();
    Spectrum::from_components(&grid, out_rank, comps).expect("multiplier output shape")
}

/// Scalar multiplier applied to every component alike.
pub fn scalar_multiplier<F>(f: &Field, m: F) -> Field
where
    F: Fn(&Mode) -> f64 + Sync,
{
    let s = f.spectrum();
    let nc = f.rank().components();
    multiplier(&s, f.rank(), |md, v| {
        let w = m(md);
        let mut out = [Complex64::default(); 2];
        for c in 0..nc {
            out[c] = v[c] * w;
        }
        out
    })
    .to_field()
}

/// `∂_a` of every component.
pub fn partial(f: &Field, a: usize) -> Field {
    let nc = f.rank().components();
    multiplier(&f.spectrum(), f.rank(), |md, v| {
        let d = md.d(a);
        let mut out = [Complex64::default(); 2];
        for c in 0..nc {
            out[c] = v[c] * d;
        }
        out
    })
    .to_field()
}

/// `(e·∇)` of every component.
pub fn directional(f: &Field, e: [f64; 2]) -> Field {
    let nc = f.rank().components();
    multiplier(&f.spectrum(), f.rank(), |md, v| {
        let d = md.d(0) * e[0] + md.d(1) * e[1];
        let mut out = [Complex64::default(); 2];
        for c in 0..nc {
            out[c] = v[c] * d;
        }
        out
    })
    .to_field()
}

pub fn gradient(f: &Field) -> Result<Field, TorusError> {
    expect_rank(f.rank(), Rank::Scalar)?;
    Ok(multiplier(&f.spectrum(), Rank::Vector, |md, v| [md.d(0) * v[0], md.d(1) * v[0]]).to_field())
}

/// `∇⊥f = (−∂₂f, ∂₁f)`.
pub fn perp_gradient(f: &Field) -> Result<Field, TorusError> {
    expect_rank(f.rank(), Rank::Scalar)?;
    Ok(multiplier(&f.spectrum(), Rank::Vector, |md, v| [-md.d(1) * v[0], md.d(0) * v[0]]).to_field())
}

/// Divergence of a vector (to a scalar) or of a symmetric traceless tensor
/// (to a vector, row-wise).
pub fn divergence(f: &Field) -> Result<Field, TorusError> {
    Ok(divergence_spectrum(&f.spectrum())?.to_field())
}

pub fn divergence_spectrum(s: &Spectrum) -> Result<Spectrum, TorusError> {
    match s.rank() {
        Rank::Vector => Ok(multiplier(s, Rank::Scalar, |md, v| [md.d(0) * v[0] + md.d(1) * v[1], Complex64::default()])),
        Rank::SymTraceless => Ok(multiplier(s, Rank::Vector, |md, v| {
            [md.d(0) * v[0] + md.d(1) * v[1], md.d(0) * v[1] - md.d(1) * v[0]]
        })),
        found => Err(TorusError::Rank { expected: Rank::Vector, found }),
    }
}

/// `∂ᵢ∂ⱼRᵢⱼ` of a symmetric traceless tensor.
pub fn div_div(r: &Field) -> Result<Field, TorusError> {
    expect_rank(r.rank(), Rank::SymTraceless)?;
    Ok(multiplier(&r.spectrum(), Rank::Scalar, |md, v| {
        let (d1, d2) = (md.d(0), md.d(1));
        [(d1 * d1 - d2 * d2) * v[0] + d1 * d2 * v[1] * 2.0, Complex64::default()]
    })
    .to_field())
}

pub fn laplacian(f: &Field) -> Field {
    scalar_multiplier(f, Mode::lap)
}

pub fn inverse_laplacian(f: &Field) -> Field {
    scalar_multiplier(f, Mode::inv_lap)
}

/// `(−Δ)^α` with symbol `(2π|κ|)^{2α}`, zero on the mean.
pub fn fractional_laplacian(f: &Field, alpha: f64) -> Result<Field, TorusError> {
    if !(alpha >= 0.0) {
        return Err(TorusError::NegativeExponent(alpha));
    }
    Ok(scalar_multiplier(f, |md| {
        let k2 = md.kappa_sq();
        if k2 == 0.0 {
            0.0
        } else {
            (TWO_PI * TWO_PI * k2).powf(alpha)
        }
    }))
}

/// Helmholtz–Leray projection onto divergence-free fields. The mean is kept;
/// unresolved Nyquist-only modes are dropped.
pub fn leray_project(v: &Field) -> Result<Field, TorusError> {
    expect_rank(v.rank(), Rank::Vector)?;
    Ok(leray_spectrum(&v.spectrum()).to_field())
}

pub fn leray_spectrum(s: &Spectrum) -> Spectrum {
    multiplier(s, Rank::Vector, |md, v| {
        if md.is_zero() {
            return [v[0], v[1]];
        }
        let k2 = md.kappa_sq();
        if k2 == 0.0 {
            return [Complex64::default(); 2];
        }
        let [k1, kk2] = md.kappa;
        let dot = v[0] * k1 + v[1] * kk2;
        [v[0] - dot * (k1 / k2), v[1] - dot * (kk2 / k2)]
    })
}

/// The inverse divergence `ℛ`, a right inverse of `div` on mean-free vector
/// fields with symmetric traceless values:
/// `R₁₁ = Δ⁻¹(∂₁v₁ − ∂₂v₂)`, `R₁₂ = Δ⁻¹(∂₁v₂ + ∂₂v₁)`.
///
/// Rejects `v` whose mean exceeds `1e−10·‖v‖∞`.
pub fn inverse_divergence(v: &Field) -> Result<Field, TorusError> {
    expect_rank(v.rank(), Rank::Vector)?;
    let tol = 1e-10 * v.sup();
    let m = v.mean();
    let mean = m[0].hypot(m[1]);
    if mean > tol && mean > 0.0 {
        return Err(TorusError::NonzeroMean { mean, tol });
    }
    Ok(inverse_divergence_spectrum(&v.spectrum()).to_field())
}

/// `ℛ` without the mean check; the mean is discarded.
pub fn inverse_divergence_spectrum(s: &Spectrum) -> Spectrum {
    multiplier(s, Rank::SymTraceless, |md, v| {
        let il = md.inv_lap();
        let (d1, d2) = (md.d(0), md.d(1));
        [(d1 * v[0] - d2 * v[1]) * il, (d1 * v[1] + d2 * v[0]) * il]
    })
}

/// `ℛ ℙ_H`, the combination applied to every stress source.
pub fn inverse_divergence_leray(v: &Field) -> Result<Field, TorusError> {
    expect_rank(v.rank(), Rank::Vector)?;
    Ok(inverse_divergence_spectrum(&leray_spectrum(&v.spectrum())).to_field())
}

/// `ℙ_{≠0}`: removes the spatial mean.
pub fn project_nonzero(f: &Field) -> Field {
    scalar_multiplier(f, |md| if md.is_zero() { 0.0 } else { 1.0 })
}

/// `ℙ_{≥c}`: keeps the modes with `|ξ| ≥ cutoff`.
pub fn project_high(f: &Field, cutoff: f64) -> Field {
    scalar_multiplier(f, |md| if md.xi_norm() >= cutoff { 1.0 } else { 0.0 })
}

/// Keeps the box `max(|ξ₁|, |ξ₂|) ≤ band`.
pub fn truncate(f: &Field, band: i64) -> Field {
    scalar_multiplier(f, |md| if md.xi[0].abs() <= band && md.xi[1].abs() <= band { 1.0 } else { 0.0 })
}

/// Two-thirds rule truncation.
pub fn dealias(f: &Field) -> Field {
    truncate(f, f.grid().dealias_band())
}

/// `|∇|^{−1}` with symbol `(2π|κ|)^{−1}`, zero where `κ = 0`.
pub fn inverse_abs_gradient(f: &Field) -> Field {
    scalar_multiplier(f, |md| {
        let k2 = md.kappa_sq();
        if k2 == 0.0 {
            0.0
        } else {
            1.0 / (TWO_PI * k2.sqrt())
        }
    })
}

/// Dealiased traceless symmetric product `u ⊗̊ v`.
pub fn sym_outer_dealiased(u: &Field, v: &Field) -> Result<Field, TorusError> {
    Ok(dealias(&dealias(u).sym_outer(&dealias(v))?))
}

/// `div(u ⊗ v)` with components `∂ⱼ(uᵢvⱼ)`, from pointwise products.
pub fn div_outer(u: &Field, v: &Field) -> Result<Field, TorusError> {
    expect_rank(u.rank(), Rank::Vector)?;
    expect_rank(v.rank(), Rank::Vector)?;
    let (a, b) = (u.components(), v.components());
    let n = u.grid().len();
    let prod = |i: usize, j: usize| -> Vec<f64> { (0..n).into_par_iter().map(|p| a[i][p] * b[j][p]).collect() };
    let g = u.grid();
    let m1 = Field::vector(g, prod(0, 0), prod(0, 1))?;
    let m2 = Field::vector(g, prod(1, 0), prod(1, 1))?;
    let d1 = divergence(&m1)?;
    let d2 = divergence(&m2)?;
    Field::vector(g, d1.into_components().remove(0), d2.into_components().remove(0))
}
