//! Relaxed solutions of the Navier–Stokes–Reynolds system
//! `∂_t u + (−Δ)^α u + div(u⊗u) + ∇P = div R̊`, evaluated lazily in time.

use gns_torus::ops::{div_outer, divergence, fractional_laplacian, gradient, leray_project};
use gns_torus::{Field, Grid, TimeSampledField};

use crate::util::{field_derivative, relative_to};
use crate::Result;

pub trait Relaxed: Send + Sync {
    fn grid(&self) -> &Grid;
    fn alpha(&self) -> f64;
    fn level(&self) -> u32;
    fn velocity(&self, t: f64) -> Result<Field>;
    /// The Reynolds stress in two-component traceless storage.
    fn stress(&self, t: f64) -> Result<Field>;
    fn pressure(&self, t: f64) -> Result<Field>;
    /// An interval outside which `u`, `R̊` and `P` vanish identically.
    fn time_support(&self) -> (f64, f64);
    /// Finite-difference step resolving the fastest temporal feature.
    fn time_step(&self) -> f64;

    /// `∂_t u`, by differences unless the level knows it exactly.
    fn velocity_dt(&self, t: f64) -> Result<Field> {
        field_derivative(|s| self.velocity(s), t, self.time_step())
    }

    /// `∂_t R̊`, by differences unless the level knows it exactly.
    fn stress_dt(&self, t: f64) -> Result<Field> {
        field_derivative(|s| self.stress(s), t, self.time_step())
    }
}

/// Residuals of the system at one time, relative to the largest term.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Residual {
    pub full: f64,
    /// The divergence-free part, which does not involve the pressure.
    pub leray: f64,
    pub scale: f64,
}

/// Substitutes the solution into the system at `t`, with `∂_t u` by
/// eighth-order differences at the solution's own time step.
pub fn nsr_residual(sol: &dyn Relaxed, t: f64) -> Result<Residual> {
    let u = sol.velocity(t)?;
    let dt = field_derivative(|s| sol.velocity(s), t, sol.time_step())?;
    let visc = fractional_laplacian(&u, sol.alpha())?;
    let adv = div_outer(&u, &u)?;
    let grad_p = gradient(&sol.pressure(t)?)?;
    let div_r = divergence(&sol.stress(t)?)?;
    let scale = [dt.sup(), visc.sup(), adv.sup(), grad_p.sup(), div_r.sup()].into_iter().fold(0.0, f64::max);
    let lhs = dt.add(&visc)?.add(&adv)?.sub(&div_r)?;
    let full = lhs.add(&grad_p)?.sup();
    let leray = leray_project(&lhs)?.sup();
    Ok(Residual { full: relative_to(full, scale), leray: relative_to(leray, scale), scale })
}

/// A solution sampled at fixed times, for output.
#[derive(Clone, Debug)]
pub struct SampledSolution {
    pub level: u32,
    pub u: TimeSampledField,
    pub stress: TimeSampledField,
    pub pressure: TimeSampledField,
}

pub fn sample(sol: &dyn Relaxed, times: &[f64]) -> Result<SampledSolution> {
    let mut u = Vec::with_capacity(times.len());
    let mut r = Vec::with_capacity(times.len());
    let mut p = Vec::with_capacity(times.len());
    for &t in times {
        u.push(sol.velocity(t)?);
        r.push(sol.stress(t)?);
        p.push(sol.pressure(t)?);
    }
    Ok(SampledSolution {
        level: sol.level(),
        u: TimeSampledField::new(times.to_vec(), u)?,
        stress: TimeSampledField::new(times.to_vec(), r)?,
        pressure: TimeSampledField::new(times.to_vec(), p)?,
    })
}
