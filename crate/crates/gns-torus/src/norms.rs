//! Lebesgue, Hölder-type and Sobolev norms, plus mixed space-time norms.
//!
//! The torus has unit volume, so `‖f‖_{L^p} = (⨍|f|^p)^{1/p}` and grid
//! quadrature is the sample mean, which is spectrally exact for
//! band-limited integrands.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::{ops, Field, TimeSampledField, TorusError};

const CHUNK: usize = 4096;

/// Sum in fixed chunks, combined in order. Independent of the thread count.
pub fn ordered_sum(v: &[f64]) -> f64 {
    let parts: Vec<f64> = v.par_chunks(CHUNK).map(|c| c.iter().sum::<f64>()).collect();
    parts.iter().sum()
}

/// Spatial norm descriptor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NormSpec {
    /// `L^p`, with `f64::INFINITY` for the sup norm.
    Lp(f64),
    /// `max_{|β| ≤ N} ‖∂^β f‖_∞`.
    Cn(u32),
    /// `(Σ_ξ (1 + 4π²|ξ|²)^s |f̂(ξ)|²)^{1/2}`.
    Hs(f64),
}

impl FromStr for NormSpec {
    type Err = TorusError;

    /// Accepts `L2`, `Linf`, `L1.5`, `C0`, `C2`, `H1`, `H0.5`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || TorusError::UnsupportedNorm(s.to_string());
        let (head, rest) = s.split_at(s.char_indices().nth(1).map_or(s.len(), |(i, _)| i));
        let spec = match head {
            "L" if rest == "inf" => NormSpec::Lp(f64::INFINITY),
            "L" => NormSpec::Lp(rest.parse().map_err(|_| bad())?),
            "C" => NormSpec::Cn(rest.parse().map_err(|_| bad())?),
            "H" => NormSpec::Hs(rest.parse().map_err(|_| bad())?),
            _ => return Err(bad()),
        };
        spec.validate().map_err(|_| bad())?;
        Ok(spec)
    }
}

impl fmt::Display for NormSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormSpec::Lp(p) if p.is_infinite() => write!(f, "Linf"),
            NormSpec::Lp(p) => write!(f, "L{p}"),
            NormSpec::Cn(k) => write!(f, "C{k}"),
            NormSpec::Hs(s) => write!(f, "H{s}"),
        }
    }
}

impl NormSpec {
    fn validate(&self) -> Result<(), TorusError> {
        match *self {
            NormSpec::Lp(p) if !(p >= 1.0) => Err(TorusError::UnsupportedNorm(format!("L{p}"))),
            NormSpec::Hs(s) if !s.is_finite() => Err(TorusError::UnsupportedNorm(format!("H{s}"))),
            _ => Ok(()),
        }
    }
}

/// `L^p` norm of the pointwise magnitude.
pub fn lp(f: &Field, p: f64) -> f64 {
    lp_of_values(&f.magnitude(), p)
}

/// `(⨍ |v|^p)^{1/p}` of raw samples, which are taken to be nonnegative
/// magnitudes.
pub fn lp_of_values(m: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        return m.iter().fold(0.0, |a, &b| a.max(b));
    }
    let pw: Vec<f64> = if p == 1.0 {
        m.to_vec()
    } else if p == 2.0 {
        m.par_iter().map(|x| x * x).collect()
    } else {
        m.par_iter().map(|x| x.powf(p)).collect()
    };
    (ordered_sum(&pw) / m.len() as f64).powf(1.0 / p)
}

pub fn l2(f: &Field) -> f64 {
    lp(f, 2.0)
}

pub fn sup(f: &Field) -> f64 {
    f.sup()
}

/// `max_{|β| ≤ N} ‖∂^β f‖_∞` with spectral derivatives.
pub fn cn(f: &Field, order: u32) -> f64 {
    let mut best = f.sup();
    let mut layer = vec![f.clone()];
    for _ in 0..order {
        // ∂^β for |β| = j+1 from the |β| = j layer: ∂₁ of all, plus ∂₂ of the last.
        let mut next: Vec<Field> = layer.iter().map(|g| ops::partial(g, 0)).collect();
        next.push(ops::partial(layer.last().expect("nonempty layer"), 1));
        for g in &next {
            best = best.max(g.sup());
        }
        layer = next;
    }
    best
}

/// Inhomogeneous Sobolev norm `H^s`.
pub fn hs(f: &Field, s: f64) -> f64 {
    let sp = f.spectrum();
    let w = if f.rank() == crate::Rank::SymTraceless { 2.0 } else { 1.0 };
    let n = f.grid().n();
    let grid = f.grid();
    let mut total = 0.0;
    for c in 0..f.rank().components() {
        let terms: Vec<f64> = (0..grid.len())
            .map(|idx| {
                let (a, b) = (grid.wavenumber(idx / n) as f64, grid.wavenumber(idx % n) as f64);
                (1.0 + 4.0 * PI * PI * (a * a + b * b)).powf(s) * sp.comp(c)[idx].norm_sqr()
            })
            .collect();
        total += ordered_sum(&terms);
    }
    (w * total).sqrt()
}

pub fn norm(f: &Field, spec: NormSpec) -> Result<f64, TorusError> {
    spec.validate()?;
    Ok(match spec {
        NormSpec::Lp(p) => lp(f, p),
        NormSpec::Cn(k) => cn(f, k),
        NormSpec::Hs(s) => hs(f, s),
    })
}

/// `(Σᵢ wᵢ aᵢ^γ)^{1/γ}`, or `max aᵢ` for `γ = ∞`.
pub fn time_lp(values: &[f64], weights: &[f64], gamma: f64) -> f64 {
    if gamma.is_infinite() {
        return values.iter().fold(0.0, |a, &b| a.max(b));
    }
    let s: f64 = values.iter().zip(weights).map(|(v, w)| w * v.powf(gamma)).sum();
    s.powf(1.0 / gamma)
}

/// Mixed norm `‖f‖_{L^γ_t X}` by time quadrature of spatial norms.
pub fn mixed(f: &TimeSampledField, gamma: f64, spatial: NormSpec) -> Result<f64, TorusError> {
    if !(gamma >= 1.0) {
        return Err(TorusError::UnsupportedNorm(format!("L{gamma}_t")));
    }
    let vals = f.frames().iter().map(|fr| norm(fr, spatial)).collect::<Result<Vec<_>, _>>()?;
    Ok(time_lp(&vals, f.weights(), gamma))
}
