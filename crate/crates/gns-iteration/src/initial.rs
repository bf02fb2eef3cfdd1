//! The initial level: `u₀(t, x) = f(t)U(x)` with
//! `R̊₀ = ℛ(∂_t u₀ + (−Δ)^α u₀) + u₀⊗̊u₀` and `P₀ = −½|u₀|²`, the pressure
//! normalized to zero mean.

use gns_blocks::profile::bump_derivative;
use gns_torus::ops::{divergence, fractional_laplacian, inverse_divergence, project_nonzero};
use gns_torus::{Field, Grid};

use crate::relaxed::Relaxed;
use crate::util::gradient_sup;
use crate::{IterationError, Result};

/// The temporal factor of the initial velocity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TimeProfile {
    /// `f ≡ 1`.
    Steady,
    /// `f(t) = e·exp(−1/(1−x²))` with `x` mapping `(start, end)` to `(−1, 1)`,
    /// so `f` peaks at one and vanishes outside the interval.
    Bump { start: f64, end: f64 },
}

impl TimeProfile {
    /// `d`-th derivative for `d ≤ 3`.
    pub fn derivative(&self, t: f64, d: usize) -> f64 {
        match *self {
            TimeProfile::Steady => f64::from(d == 0),
            TimeProfile::Bump { start, end } => {
                let k = 2.0 / (end - start);
                let x = k * t - (start + end) / (end - start);
                std::f64::consts::E * k.powi(d as i32) * bump_derivative(1.0, x, d)
            }
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        self.derivative(t, 0)
    }

    fn support(&self) -> (f64, f64) {
        match *self {
            TimeProfile::Steady => (0.0, 1.0),
            TimeProfile::Bump { start, end } => (start, end),
        }
    }

    fn step(&self) -> f64 {
        match *self {
            TimeProfile::Steady => 1e-2,
            TimeProfile::Bump { start, end } => (end - start) / 400.0,
        }
    }
}

/// `(u₀, R̊₀, P₀)` stored as spatial fields times scalar time factors.
#[derive(Clone, Debug)]
pub struct InitialState {
    pub profile: TimeProfile,
    pub alpha: f64,
    /// The spatial factor `U`.
    pub shape: Field,
    /// `ℛU`, multiplying `f′`.
    r_dt: Field,
    /// `ℛ(−Δ)^α U`, multiplying `f`.
    r_visc: Field,
    /// `U⊗̊U`, multiplying `f²`.
    r_quad: Field,
    /// `−½|U|²` minus its mean, multiplying `f²`.
    p_quad: Field,
}

/// Builds the initial level from a divergence-free, mean-free shape.
pub fn initial_step(shape: &Field, profile: TimeProfile, alpha: f64) -> Result<InitialState> {
    let scale = gradient_sup(shape);
    let div = divergence(shape)?.sup();
    let tol = 1e-10 * scale;
    if div > tol && div > 0.0 {
        return Err(IterationError::NotDivergenceFree { div, tol });
    }
    let m = shape.mean();
    let mean = m[0].hypot(m[1]);
    let tol = 1e-12 * shape.sup();
    if mean > tol && mean > 0.0 {
        return Err(IterationError::NotMeanFree { mean, tol });
    }
    Ok(InitialState {
        profile,
        alpha,
        shape: shape.clone(),
        r_dt: inverse_divergence(shape)?,
        r_visc: inverse_divergence(&fractional_laplacian(shape, alpha)?)?,
        r_quad: shape.sym_outer(shape)?,
        p_quad: project_nonzero(&shape.dot(shape)?.scale(-0.5)),
    })
}

impl Relaxed for InitialState {
    fn grid(&self) -> &Grid {
        self.shape.grid()
    }

    fn alpha(&self) -> f64 {
        self.alpha
    }

    fn level(&self) -> u32 {
        0
    }

    fn velocity(&self, t: f64) -> Result<Field> {
        Ok(self.shape.scale(self.profile.value(t)))
    }

    fn stress(&self, t: f64) -> Result<Field> {
        let (f, f1) = (self.profile.value(t), self.profile.derivative(t, 1));
        Ok(self.r_dt.scale(f1).axpy(f, &self.r_visc)?.axpy(f * f, &self.r_quad)?)
    }

    fn pressure(&self, t: f64) -> Result<Field> {
        let f = self.profile.value(t);
        Ok(self.p_quad.scale(f * f))
    }

    fn time_support(&self) -> (f64, f64) {
        self.profile.support()
    }

    fn time_step(&self) -> f64 {
        self.profile.step()
    }

    fn velocity_dt(&self, t: f64) -> Result<Field> {
        Ok(self.shape.scale(self.profile.derivative(t, 1)))
    }

    fn stress_dt(&self, t: f64) -> Result<Field> {
        let (f, f1, f2) = (self.profile.value(t), self.profile.derivative(t, 1), self.profile.derivative(t, 2));
        Ok(self.r_dt.scale(f2).axpy(f1, &self.r_visc)?.axpy(2.0 * f * f1, &self.r_quad)?)
    }
}
