//! The mollified level `u_ℓ = (u_q ∗ φ_ℓ) ∗ φ̃_ℓ`, its stress
//! `R̊*_ℓ = R̊_ℓ + R̊_com` and pressure
//! `P_ℓ = (P_q)_ℓ − ½|u_ℓ|² + ½(|u_q|²)_ℓ`.
//!
//! Space mollification is the grid multiplier of [`SpatialMollifier`]; time
//! mollification is the discrete kernel of [`TimeKernel`], evaluated on the
//! parent level at the kernel nodes around each requested time.

use std::sync::Arc;

use gns_torus::ops::gradient;
use gns_torus::{Field, Grid, SpatialMollifier, TimeKernel};

use crate::relaxed::Relaxed;
use crate::util::fields_derivative;
use crate::{IterationError, Result};

pub struct Mollified {
    pub base: Arc<dyn Relaxed>,
    pub space: SpatialMollifier,
    pub kernel: TimeKernel,
    /// Set when the spatial kernel spans too few grid samples.
    pub warning: Option<String>,
}

/// Mollifies `base` at scale `ell` with a time kernel of `2·nodes − 1` nodes.
pub fn mollify_state(base: Arc<dyn Relaxed>, ell: f64, nodes: usize) -> Result<Mollified> {
    if !(ell > 0.0 && ell < 0.25) {
        return Err(IterationError::Resolution(format!("mollification scale {ell} outside (0, 1/4)")));
    }
    let h = base.grid().spacing();
    if ell < h {
        return Err(IterationError::Resolution(format!("mollification scale {ell:e} is below one grid cell {h:e}")));
    }
    if nodes < 2 {
        return Err(IterationError::Resolution("the time kernel needs at least two nodes per side".into()));
    }
    let space = SpatialMollifier::new(base.grid(), ell);
    let warning = space.resolution_warning();
    Ok(Mollified { base, space, kernel: TimeKernel::new(ell, nodes), warning })
}

impl Mollified {
    pub fn ell(&self) -> f64 {
        self.kernel.ell()
    }

    /// `Σⱼ wⱼ F(t − sⱼ)` followed by the spatial multiplier.
    fn smooth<F>(&self, f: F, t: f64) -> Result<Field>
    where
        F: Fn(f64) -> Result<Field>,
    {
        let mut acc: Option<Field> = None;
        for (s, w) in self.kernel.offsets().iter().zip(self.kernel.weights()) {
            let v = f(t - s)?;
            acc = Some(match acc {
                None => v.scale(*w),
                Some(a) => a.axpy(*w, &v)?,
            });
        }
        Ok(self.space.apply(&acc.expect("kernel has nodes"))?)
    }

    pub fn u_ell(&self, t: f64) -> Result<Field> {
        self.smooth(|s| self.base.velocity(s), t)
    }

    pub fn r_ell(&self, t: f64) -> Result<Field> {
        self.smooth(|s| self.base.stress(s), t)
    }

    /// `u_ℓ⊗̊u_ℓ − (u_q⊗̊u_q)_ℓ`.
    pub fn r_com(&self, t: f64) -> Result<Field> {
        let u = self.u_ell(t)?;
        let quad = self.smooth(|s| Ok(self.base.velocity(s).and_then(|v| Ok(v.sym_outer(&v)?))?), t)?;
        Ok(u.sym_outer(&u)?.sub(&quad)?)
    }

    pub fn r_star(&self, t: f64) -> Result<Field> {
        Ok(self.r_ell(t)?.add(&self.r_com(t)?)?)
    }

    pub fn p_ell(&self, t: f64) -> Result<Field> {
        let u = self.u_ell(t)?;
        let p = self.smooth(|s| self.base.pressure(s), t)?;
        let energy = self.smooth(|s| Ok(self.base.velocity(s).and_then(|v| Ok(v.dot(&v)?))?), t)?;
        Ok(p.axpy(-0.5, &u.dot(&u)?)?.axpy(0.5, &energy)?)
    }

    /// `max_t ‖R̊_com‖∞ / (ℓ·max_t ‖u_ℓ⊗u_ℓ‖_{C¹})` over the given times,
    /// the constant of the commutator estimate. The `C¹` norm adds the sup of
    /// the tensor, of its spatial gradient and of its time derivative.
    pub fn commutator_constant(&self, times: &[f64]) -> Result<f64> {
        let outer = |s: f64| -> Result<Vec<Field>> {
            let u = self.u_ell(s)?;
            let (u1, u2) = (u.component_field(0), u.component_field(1));
            Ok(vec![u1.mul_scalar(&u1)?, u1.mul_scalar(&u2)?, u2.mul_scalar(&u2)?])
        };
        let (mut com, mut c1) = (0.0f64, 0.0f64);
        for &t in times {
            com = com.max(self.r_com(t)?.sup());
            let m = outer(t)?;
            let dt = fields_derivative(outer, t, self.base.time_step())?;
            let value = m.iter().map(Field::sup).fold(0.0, f64::max);
            let mut grad = 0.0f64;
            for c in &m {
                grad = grad.max(gradient(c)?.sup());
            }
            let time = dt.iter().map(Field::sup).fold(0.0, f64::max);
            c1 = c1.max(value + grad + time);
        }
        Ok(if c1 > 0.0 { com / (self.ell() * c1) } else { 0.0 })
    }

    /// `(‖R̊_ℓ‖_{L¹_{t,x}}, ‖R̊_q‖_{L¹_{t,x}})` by the rectangle rule on the
    /// uniform grid of spacing `ℓ/m` through the kernel nodes, covering both
    /// supports. On that grid the discrete convolution contracts exactly.
    pub fn l1_contraction(&self) -> Result<(f64, f64)> {
        let offsets = self.kernel.offsets();
        let dt = if offsets.len() > 1 { offsets[1] - offsets[0] } else { self.ell() };
        let (a, b) = self.base.time_support();
        let (lo, hi) = (a - 2.0 * self.ell(), b + 2.0 * self.ell());
        let count = ((hi - lo) / dt).ceil() as usize + 1;
        let l1 = |f: &Field| gns_torus::norms::lp(f, 1.0);
        let (mut moll, mut orig) = (0.0, 0.0);
        for i in 0..count {
            let t = lo + i as f64 * dt;
            moll += dt * l1(&self.r_ell(t)?);
            orig += dt * l1(&self.base.stress(t)?);
        }
        Ok((moll, orig))
    }

    /// `∂_t R̊_com` from the parent's time derivatives.
    pub fn r_com_dt(&self, t: f64) -> Result<Field> {
        let u = self.u_ell(t)?;
        let ut = self.smooth(|s| self.base.velocity_dt(s), t)?;
        let quad = self.smooth(
            |s| {
                let (v, vt) = (self.base.velocity(s)?, self.base.velocity_dt(s)?);
                Ok(v.sym_outer(&vt)?.scale(2.0))
            },
            t,
        )?;
        Ok(u.sym_outer(&ut)?.scale(2.0).sub(&quad)?)
    }

    pub fn r_star_dt(&self, t: f64) -> Result<Field> {
        Ok(self.smooth(|s| self.base.stress_dt(s), t)?.add(&self.r_com_dt(t)?)?)
    }
}

impl Relaxed for Mollified {
    fn grid(&self) -> &Grid {
        self.base.grid()
    }

    fn alpha(&self) -> f64 {
        self.base.alpha()
    }

    fn level(&self) -> u32 {
        self.base.level()
    }

    fn velocity(&self, t: f64) -> Result<Field> {
        self.u_ell(t)
    }

    fn stress(&self, t: f64) -> Result<Field> {
        self.r_star(t)
    }

    fn pressure(&self, t: f64) -> Result<Field> {
        self.p_ell(t)
    }

    fn time_support(&self) -> (f64, f64) {
        let (a, b) = self.base.time_support();
        (a - self.ell(), b + self.ell())
    }

    fn time_step(&self) -> f64 {
        self.base.time_step()
    }

    fn velocity_dt(&self, t: f64) -> Result<Field> {
        self.smooth(|s| self.base.velocity_dt(s), t)
    }

    fn stress_dt(&self, t: f64) -> Result<Field> {
        self.r_star_dt(t)
    }
}
