//! The four velocity perturbations at one time:
//! `w_p = Σ a g W`, `w_p + w_c = c^{−1}∇⊥(Σ a g Ψ)`,
//! `w_t = −μ^{−1} ℙ_Hℙ_{≠0} Σ a²g²|W|²k₁` and
//! `w_o = −σ^{−1} ℙ_Hℙ_{≠0} Σ h (⨍W⊗W)∇a²`.
//!
//! The corrector is taken from the potential form, which makes
//! `w_p + w_c` divergence-free to rounding; its closed form
//! `g(aW^c + c^{−1}∇⊥a Ψ)` differs from it only through aliasing.

use gns_blocks::{GridJet, TemporalPattern};
use gns_torus::ops::{gradient, leray_project, perp_gradient, project_nonzero};
use gns_torus::Field;

use crate::amplitudes::AmplitudeSet;
use crate::Result;

#[derive(Clone, Debug)]
pub struct Perturbation {
    pub t: f64,
    pub w_p: Field,
    pub w_c: Field,
    pub w_t: Field,
    pub w_o: Field,
}

impl Perturbation {
    pub fn total(&self) -> Result<Field> {
        Ok(self.w_p.add(&self.w_c)?.add(&self.w_t)?.add(&self.w_o)?)
    }

    /// `w_c + w_t + w_o`.
    pub fn rest(&self) -> Result<Field> {
        Ok(self.w_c.add(&self.w_t)?.add(&self.w_o)?)
    }
}

/// `M v` for a constant symmetric `M = (m₁₁, m₁₂, m₂₂)` and a vector field `v`.
pub(crate) fn apply_matrix(m: [f64; 3], v: &Field) -> Result<Field> {
    let (v1, v2) = (v.component_field(0), v.component_field(1));
    let a = v1.scale(m[0]).axpy(m[1], &v2)?;
    let b = v1.scale(m[1]).axpy(m[2], &v2)?;
    Ok(Field::vector(v.grid(), a.into_components().remove(0), b.into_components().remove(0))?)
}

/// `ℙ_Hℙ_{≠0}`.
pub(crate) fn leray_nonzero(v: &Field) -> Result<Field> {
    Ok(leray_project(&project_nonzero(v))?)
}

/// Whether `g_(k)` or its derivative is nonzero at `t`.
pub(crate) fn active(temporal: &TemporalPattern, k: usize, t: f64) -> bool {
    temporal.g(k, t) != 0.0 || temporal.g_deriv(k, t, 1) != 0.0
}

pub fn build_perturbations(amps: &AmplitudeSet, jets: &[GridJet], temporal: &TemporalPattern) -> Result<Perturbation> {
    let t = amps.t;
    let grid = amps.grid();
    let scales = &jets[0].jet.scales;
    let (mu, sigma, c) = (scales.mu, scales.sigma as f64, scales.c as f64);
    let mut w_p = Field::zeros(grid, gns_torus::Rank::Vector);
    let mut potential = Field::zeros(grid, gns_torus::Rank::Scalar);
    let mut transport = Field::zeros(grid, gns_torus::Rank::Vector);
    let mut osc = Field::zeros(grid, gns_torus::Rank::Vector);
    for (k, jet) in jets.iter().enumerate() {
        let a = &amps.a[k];
        let a2 = a.mul_scalar(a)?;
        let g = temporal.g(k, t);
        if g != 0.0 {
            let amp = jet.w_amplitude(t);
            w_p = w_p.axpy(g, &a.mul_scalar(&amp)?.times_vector(jet.jet.k1)?)?;
            potential = potential.axpy(g, &a.mul_scalar(&jet.psi(t))?)?;
            let energy = a2.mul_scalar(&amp.mul_scalar(&amp)?)?;
            transport = transport.axpy(g * g, &energy.times_vector(jet.jet.k1)?)?;
        }
        let h = temporal.h(k, t);
        osc = osc.axpy(h, &apply_matrix(jet.mean_outer(), &gradient(&a2)?)?)?;
    }
    let w_pc = perp_gradient(&potential)?.scale(1.0 / c);
    Ok(Perturbation {
        t,
        w_c: w_pc.sub(&w_p)?,
        w_p,
        w_t: leray_nonzero(&transport)?.scale(-1.0 / mu),
        w_o: leray_nonzero(&osc)?.scale(-1.0 / sigma),
    })
}
