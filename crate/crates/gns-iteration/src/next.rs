//! Assembly of the level `q+1`: `u_{q+1} = u_ℓ + w`, the Reynolds stress
//! `R̊_{q+1} = R̊_lin + R̊_osc + R̊_cor + R̊_rem` and the pressure from
//! `ΔP = div div(R̊ − u⊗u)`.
//!
//! `R̊_rem = ℛℙ_H div` of the pointwise defect of the oscillation identity,
//! mathematically zero; keeping it makes the stress consistent with the
//! velocity to rounding. The commutator stress is already cancelled by the
//! principal perturbation through `R̊*_ℓ` and is reported separately.

use std::sync::Arc;

use gns_blocks::{make_profiles, GridJet, Jet, JetScales, TemporalPattern};
use gns_geometry::WavevectorSet;
use gns_params::ScaleSet;
use gns_torus::ops::{
    directional, div_div, div_outer, divergence, fractional_laplacian, gradient, inverse_divergence_leray, inverse_laplacian,
    leray_project, perp_gradient, project_nonzero,
};
use gns_torus::{Field, Grid, Rank};

use crate::amplitudes::{amplitude_rates, build_amplitudes, AmplitudeSet, TimeCutoff};
use crate::mollified::{mollify_state, Mollified};
use crate::perturbation::{active, apply_matrix, build_perturbations, Perturbation};
use crate::relaxed::Relaxed;
use crate::util::{field_derivative, fields_derivative, gradient_sup, relative_to};
use crate::{IterationError, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct StepConfig {
    /// Fourier band of the grid jets; `None` means `n/8`, which keeps the
    /// quadratic products of jets and amplitudes free of aliasing.
    pub band: Option<i64>,
    /// `δ_{q+1}`; `None` takes the larger of the scale set's value and
    /// `2 sup|R̊*_ℓ|`, so that `χ` stays on its flat branch.
    pub delta: Option<f64>,
    /// Time-kernel nodes per side.
    pub kernel_nodes: usize,
    /// Multiplies every amplitude; `0` switches the perturbation off.
    pub perturbation_scale: f64,
    /// Uniform times used to estimate `sup|R̊*_ℓ|`.
    pub sup_samples: usize,
}

impl Default for StepConfig {
    fn default() -> Self {
        Self { band: None, delta: None, kernel_nodes: 8, perturbation_scale: 1.0, sup_samples: 64 }
    }
}

#[derive(Clone, Debug)]
pub struct StressDecomposition {
    pub t: f64,
    pub r_lin: Field,
    pub r_osc1: Field,
    pub r_osc2: Field,
    pub r_osc3: Field,
    pub r_cor: Field,
    pub r_rem: Field,
    /// Diagnostic only; not part of [`Self::r_next`].
    pub r_com: Field,
}

impl StressDecomposition {
    pub fn r_next(&self) -> Result<Field> {
        let mut r = self.r_lin.add(&self.r_osc1)?;
        for c in [&self.r_osc2, &self.r_osc3, &self.r_cor, &self.r_rem] {
            r.add_assign(c)?;
        }
        Ok(r)
    }

    /// Named components, for reports.
    pub fn components(&self) -> [(&'static str, &Field); 7] {
        [
            ("r_lin", &self.r_lin),
            ("r_osc1", &self.r_osc1),
            ("r_osc2", &self.r_osc2),
            ("r_osc3", &self.r_osc3),
            ("r_cor", &self.r_cor),
            ("r_rem", &self.r_rem),
            ("r_com", &self.r_com),
        ]
    }
}

/// Everything computed at one time.
#[derive(Clone, Debug)]
pub struct StepState {
    pub t: f64,
    pub amplitudes: AmplitudeSet,
    pub u_ell: Field,
    pub r_star: Field,
    pub perturbation: Perturbation,
    pub decomposition: StressDecomposition,
    /// Relative defect of the oscillation identity, measured where `f_u = 1`.
    pub oscillation_defect: Option<f64>,
}

pub struct NextLevel {
    pub mollified: Mollified,
    pub set: WavevectorSet,
    pub jets: Vec<GridJet>,
    pub temporal: TemporalPattern,
    pub scales: JetScales,
    pub delta: f64,
    pub cutoff: TimeCutoff,
    pub config: StepConfig,
    /// Difference step for the amplitudes.
    pub amplitude_step: f64,
    step: f64,
}

/// Builds the level `q+1` on top of `base` with the scales of `scales`.
pub fn assemble_next(base: Arc<dyn Relaxed>, scales: &ScaleSet, config: &StepConfig) -> Result<NextLevel> {
    let ell = scales.ell;
    let grid = base.grid().clone();
    let mollified = mollify_state(base, ell, config.kernel_nodes)?;
    let set = WavevectorSet::build();
    let js = JetScales::realize(scales, set.n_lambda)?;
    let band = config.band.unwrap_or(grid.n() as i64 / 8);
    if band < js.c {
        return Err(IterationError::Resolution(format!(
            "jet band {band} below the jet frequency {}; refine the grid",
            js.c
        )));
    }
    let profile = make_profiles();
    let jets = set
        .directions
        .iter()
        .map(|d| GridJet::new(&Jet::new(d.clone(), js.clone(), &profile)?, &grid, band))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let temporal = TemporalPattern::standard(js.tau, js.sigma, set.len())?;
    let (s0, s1) = mollified.time_support();
    let cutoff = TimeCutoff { start: s0, end: s1, ramp: 0.5 * ell };
    let delta = match config.delta {
        Some(d) => d,
        None => {
            let m = config.sup_samples.max(2);
            let mut sup = 0.0f64;
            for i in 0..m {
                sup = sup.max(mollified.r_star(s0 + (s1 - s0) * i as f64 / (m - 1) as f64)?.sup());
            }
            scales.delta_q1.max(2.0 * sup)
        }
    };
    // Fastest phase: the top retained jet mode, and the width of g's window.
    let mmax = ((band as f64 * 2f64.sqrt()) / js.c as f64).ceil() + 1.0;
    let omega = std::f64::consts::TAU * js.phase_cycles() as f64 * mmax;
    let window = temporal.support / (js.tau * js.sigma as f64);
    let step = (0.1 / omega).min(window / 400.0);
    Ok(NextLevel {
        mollified,
        set,
        jets,
        temporal,
        scales: js,
        delta,
        cutoff,
        config: config.clone(),
        amplitude_step: ell / 256.0,
        step,
    })
}

/// Full symmetric `(e₁₁, e₁₂, e₂₂)` samples.
type SymSamples = Vec<[f64; 3]>;

impl NextLevel {
    pub fn grid(&self) -> &Grid {
        self.mollified.grid()
    }

    pub fn amplitudes(&self, t: f64) -> Result<AmplitudeSet> {
        let r = self.mollified.r_star(t)?;
        self.amplitudes_for(&r, t)
    }

    fn amplitudes_for(&self, r_star: &Field, t: f64) -> Result<AmplitudeSet> {
        let f = self.cutoff.value(t);
        let mut amps = build_amplitudes(r_star, t, f, self.delta, &self.set)?;
        if self.config.perturbation_scale != 1.0 {
            amps.a = amps.a.iter().map(|a| a.scale(self.config.perturbation_scale)).collect();
        }
        Ok(amps)
    }

    /// `∂_t a_(k)` by the chain rule.
    pub fn amplitudes_dt(&self, t: f64) -> Result<Vec<Field>> {
        let r = self.mollified.r_star(t)?;
        let amps = self.amplitudes_for(&r, t)?;
        self.rates_for(&amps, &r, t)
    }

    fn rates_for(&self, amps: &AmplitudeSet, r_star: &Field, t: f64) -> Result<Vec<Field>> {
        let (lo, hi) = self.cutoff.support();
        if t <= lo || t >= hi {
            return Ok(vec![Field::zeros(self.grid(), Rank::Scalar); self.set.len()]);
        }
        let r_dt = self.mollified.r_star_dt(t)?;
        let rates = amplitude_rates(amps, r_star, &r_dt, self.cutoff.derivative(t), &self.set)?;
        let s = self.config.perturbation_scale;
        Ok(if s != 1.0 { rates.iter().map(|a| a.scale(s)).collect() } else { rates })
    }

    /// `∂_t a_(k)` by differences at [`Self::amplitude_step`], a cross-check
    /// of [`Self::amplitudes_dt`].
    pub fn amplitudes_dt_fd(&self, t: f64) -> Result<Vec<Field>> {
        let h = self.amplitude_step;
        let (lo, hi) = self.cutoff.support();
        if t + 2.0 * h <= lo || t - 2.0 * h >= hi {
            return Ok(vec![Field::zeros(self.grid(), Rank::Scalar); self.set.len()]);
        }
        fields_derivative(|s| Ok(self.amplitudes(s)?.a), t, h)
    }

    pub fn perturbation(&self, t: f64) -> Result<Perturbation> {
        build_perturbations(&self.amplitudes(t)?, &self.jets, &self.temporal)
    }

    /// The stated terms of the oscillation identity
    /// `w_p⊗w_p + R̊*_ℓ − ρf²Id − Σa²g²ℙ_{≠0}(W⊗W) − Σa²(g²−1)⨍W⊗W`,
    /// summed pointwise, with the largest term magnitude.
    fn oscillation_terms(&self, amps: &AmplitudeSet, w_p: &Field, r_star: &Field) -> (SymSamples, f64) {
        let t = amps.t;
        let n = self.grid().len();
        let f2 = amps.f_u * amps.f_u;
        let (p1, p2) = (w_p.comp(0), w_p.comp(1));
        let (r11, r12) = (r_star.comp(0), r_star.comp(1));
        let rho = amps.rho.comp(0);
        let mut e: SymSamples = (0..n)
            .map(|i| {
                let wp = [p1[i] * p1[i], p1[i] * p2[i], p2[i] * p2[i]];
                let r = [r11[i], r12[i], -r11[i]];
                let id = rho[i] * f2;
                [wp[0] + r[0] - id, wp[1] + r[1], wp[2] + r[2] - id]
            })
            .collect();
        let mut scale = 0.0f64;
        for i in 0..n {
            let wp2 = p1[i] * p1[i] + p2[i] * p2[i];
            let r = std::f64::consts::SQRT_2 * r11[i].hypot(r12[i]);
            scale = scale.max(wp2).max(r).max(std::f64::consts::SQRT_2 * rho[i] * f2);
        }
        for (k, jet) in self.jets.iter().enumerate() {
            let a = amps.a[k].comp(0);
            let g = self.temporal.g(k, t);
            let m = jet.mean_outer();
            let k1 = jet.jet.k1;
            let amp = if g != 0.0 { Some(jet.w_amplitude(t)) } else { None };
            for i in 0..n {
                let a2 = a[i] * a[i];
                let ww = match &amp {
                    Some(w) => {
                        let s = w.comp(0)[i] * w.comp(0)[i];
                        [s * k1[0] * k1[0], s * k1[0] * k1[1], s * k1[1] * k1[1]]
                    }
                    None => [0.0; 3],
                };
                for c in 0..3 {
                    e[i][c] -= a2 * g * g * (ww[c] - m[c]) + a2 * (g * g - 1.0) * m[c];
                }
            }
        }
        (e, scale)
    }

    /// State, perturbation and stress decomposition at `t`.
    pub fn state(&self, t: f64) -> Result<StepState> {
        let grid = self.grid().clone();
        let r_star = self.mollified.r_star(t)?;
        let u_ell = self.mollified.u_ell(t)?;
        let amps = self.amplitudes_for(&r_star, t)?;
        let a_dt = self.rates_for(&amps, &r_star, t)?;
        let pert = build_perturbations(&amps, &self.jets, &self.temporal)?;
        let js = &self.scales;
        let (mu, sigma, c) = (js.mu, js.sigma as f64, js.c as f64);
        let w = pert.total()?;

        let mut dpot = Field::zeros(&grid, Rank::Scalar);
        let mut osc1 = Field::zeros(&grid, Rank::Vector);
        let mut osc2 = Field::zeros(&grid, Rank::Vector);
        let mut osc3 = Field::zeros(&grid, Rank::Vector);
        for (k, jet) in self.jets.iter().enumerate() {
            let (a, at) = (&amps.a[k], &a_dt[k]);
            let m = jet.mean_outer();
            let h = self.temporal.h(k, t);
            let a_at = a.mul_scalar(at)?;
            osc3 = osc3.axpy(h, &apply_matrix(m, &gradient(&a_at.scale(2.0))?)?)?;
            if !active(&self.temporal, k, t) {
                continue;
            }
            let (g, g1) = (self.temporal.g(k, t), self.temporal.g_deriv(k, t, 1));
            let psi = jet.psi(t);
            let src = a.scale(g1).axpy(g, at)?.mul_scalar(&psi)?.axpy(g, &a.mul_scalar(&jet.psi_dt(t))?)?;
            dpot.add_assign(&src)?;
            let amp = jet.w_amplitude(t);
            let amp2 = amp.mul_scalar(&amp)?;
            let a2 = a.mul_scalar(a)?;
            let grad_a2 = gradient(&a2)?;
            let along = directional(&a2, jet.jet.k1);
            let ww_grad = amp2.mul_scalar(&along)?.times_vector(jet.jet.k1)?;
            osc1 = osc1.axpy(g * g, &ww_grad.sub(&apply_matrix(m, &grad_a2)?)?)?;
            let d_a2g2 = a_at.scale(2.0 * g * g).axpy(2.0 * g * g1, &a2)?;
            osc2 = osc2.axpy(1.0, &d_a2g2.mul_scalar(&amp2)?.times_vector(jet.jet.k1)?)?;
        }
        let dt_wpc = perp_gradient(&dpot)?.scale(1.0 / c);
        let lin = dt_wpc
            .add(&fractional_laplacian(&w, self.mollified.alpha())?)?
            .add(&div_outer(&u_ell, &w)?)?
            .add(&div_outer(&w, &u_ell)?)?;
        let rest = pert.rest()?;
        let cor = div_outer(&pert.w_p, &rest)?.add(&div_outer(&rest, &w)?)?;

        let (e, scale) = self.oscillation_terms(&amps, &pert.w_p, &r_star);
        let defect = e.iter().map(gns_geometry::frobenius).fold(0.0, f64::max);
        let e1: Vec<f64> = e.iter().map(|v| 0.5 * (v[0] - v[2])).collect();
        let e2: Vec<f64> = e.iter().map(|v| v[1]).collect();
        let e_tl = Field::from_components(&grid, Rank::SymTraceless, vec![e1, e2])?;
        let oscillation_defect = (amps.f_u == 1.0).then(|| relative_to(defect, scale));

        let decomposition = StressDecomposition {
            t,
            r_lin: inverse_divergence_leray(&lin)?,
            r_osc1: inverse_divergence_leray(&project_nonzero(&osc1))?,
            r_osc2: inverse_divergence_leray(&project_nonzero(&osc2))?.scale(-1.0 / mu),
            r_osc3: inverse_divergence_leray(&project_nonzero(&osc3))?.scale(-1.0 / sigma),
            r_cor: inverse_divergence_leray(&cor)?,
            r_rem: inverse_divergence_leray(&divergence(&e_tl)?)?,
            r_com: self.mollified.r_com(t)?,
        };
        Ok(StepState { t, amplitudes: amps, u_ell, r_star, perturbation: pert, decomposition, oscillation_defect })
    }

    /// `‖div(w_p + w_c)‖∞` and `‖div u_{q+1}‖∞`, each relative to the sup
    /// of the field's first derivatives.
    pub fn divergence_defects(&self, state: &StepState) -> Result<(f64, f64)> {
        let wpc = state.perturbation.w_p.add(&state.perturbation.w_c)?;
        let u = state.u_ell.add(&state.perturbation.total()?)?;
        let rel = |f: &Field| -> Result<f64> { Ok(relative_to(divergence(f)?.sup(), gradient_sup(f))) };
        Ok((rel(&wpc)?, rel(&u)?))
    }

    /// `‖R̊ − ℛℙ_H div R̊‖∞ / ‖R̊‖∞` for the new stress.
    pub fn consistency_defect(&self, state: &StepState) -> Result<f64> {
        let r = state.decomposition.r_next()?;
        let back = inverse_divergence_leray(&divergence(&r)?)?;
        Ok(relative_to(r.max_abs_diff(&back)?, r.sup()))
    }

    /// Relative residuals of the two defining relations of the temporal
    /// correctors at `t`: the transport one for `w_t` and the oscillation one
    /// for `w_o`. Their left sides differentiate the correctors in time.
    /// Difference step for `w_o`. Away from the windows of `g` it moves on
    /// the amplitude scale, and a short step would only amplify the rounding
    /// noise that the spectral gradient of `a²` carries.
    fn oscillation_step(&self, t: f64) -> f64 {
        let coarse = 8.0 * self.amplitude_step;
        let window = self.temporal.support / (self.scales.tau * self.scales.sigma as f64);
        let near = (0..self.temporal.len())
            .flat_map(|k| self.temporal.support_intervals(k))
            .any(|(a, b)| t > a - 3.0 * coarse && t < b + 3.0 * coarse);
        if near { window / 40.0 } else { coarse }
    }

    pub fn corrector_identities(&self, t: f64) -> Result<(f64, f64)> {
        let grid = self.grid().clone();
        let js = &self.scales;
        let (mu, sigma) = (js.mu, js.sigma as f64);
        let d_t = field_derivative(|s| Ok(self.perturbation(s)?.w_t), t, self.step)?;
        let d_o = field_derivative(|s| Ok(self.perturbation(s)?.w_o), t, self.oscillation_step(t))?;
        let r_star = self.mollified.r_star(t)?;
        let amps = self.amplitudes_for(&r_star, t)?;
        let a_dt = self.rates_for(&amps, &r_star, t)?;
        let gradient_part = |v: &Field| -> Result<Field> { Ok(v.sub(&leray_project(v)?)?) };
        let zero = || Field::zeros(&grid, Rank::Vector);
        let (mut t_lhs, mut t_full, mut t_rhs) = (zero(), zero(), zero());
        let (mut o_lhs, mut o_full, mut o_rhs) = (zero(), zero(), zero());
        for (k, jet) in self.jets.iter().enumerate() {
            let (a, at) = (&amps.a[k], &a_dt[k]);
            let a2 = a.mul_scalar(a)?;
            let a_at2 = a.mul_scalar(at)?.scale(2.0);
            let m = jet.mean_outer();
            let (g, g1, h) = (self.temporal.g(k, t), self.temporal.g_deriv(k, t, 1), self.temporal.h(k, t));
            let grad_a2 = apply_matrix(m, &gradient(&a2)?)?;
            let grad_dt = apply_matrix(m, &gradient(&a_at2)?)?;
            o_lhs = o_lhs.axpy(g * g - 1.0, &grad_a2)?;
            o_full = o_full.axpy(sigma * (g * g - 1.0), &grad_a2)?.axpy(h, &grad_dt)?;
            o_rhs = o_rhs.axpy(h, &grad_dt)?;
            if !active(&self.temporal, k, t) {
                continue;
            }
            let (amp, amp_dt) = (jet.w_amplitude(t), jet.w_amplitude_dt(t));
            let w = jet.w(t);
            let amp2 = amp.mul_scalar(&amp)?;
            t_lhs = t_lhs.axpy(g * g, &div_outer(&w, &w)?.mul_scalar(&a2)?)?;
            let d_a2g2 = a_at2.scale(g * g).axpy(2.0 * g * g1, &a2)?;
            let first = d_a2g2.mul_scalar(&amp2)?;
            let second = a2.mul_scalar(&amp.mul_scalar(&amp_dt)?)?.scale(2.0 * g * g);
            t_full = t_full.axpy(1.0, &first.add(&second)?.times_vector(jet.jet.k1)?)?;
            t_rhs = t_rhs.axpy(1.0, &first.times_vector(jet.jet.k1)?)?;
        }
        let pn = |f: &Field| project_nonzero(f);
        let t_left = d_t.add(&pn(&t_lhs))?;
        let t_right = gradient_part(&pn(&t_full).scale(1.0 / mu))?.sub(&pn(&t_rhs).scale(1.0 / mu))?;
        let o_left = d_o.add(&pn(&o_lhs))?;
        let o_right = gradient_part(&pn(&o_full).scale(1.0 / sigma))?.sub(&pn(&o_rhs).scale(1.0 / sigma))?;
        let rel = |l: &Field, r: &Field, terms: &[&Field]| -> Result<f64> {
            let scale = terms.iter().map(|f| f.sup()).fold(l.sup().max(r.sup()), f64::max);
            Ok(relative_to(l.max_abs_diff(r)?, scale))
        };
        Ok((rel(&t_left, &t_right, &[&d_t])?, rel(&o_left, &o_right, &[&d_o])?))
    }

    /// `‖w(t)‖∞` and `‖R̊_{q+1}(t)‖∞`, skipping the work where the cut-off vanishes.
    pub fn activity(&self, t: f64) -> Result<(f64, f64)> {
        let (lo, hi) = self.cutoff.support();
        if t + 2.0 * self.amplitude_step <= lo || t - 2.0 * self.amplitude_step >= hi {
            // Zero amplitudes and zero stress: still verify the latter.
            return Ok((0.0, self.mollified.r_star(t)?.sup()));
        }
        let s = self.state(t)?;
        Ok((s.perturbation.total()?.sup(), s.decomposition.r_next()?.sup()))
    }
}

impl Relaxed for NextLevel {
    fn grid(&self) -> &Grid {
        self.mollified.grid()
    }

    fn alpha(&self) -> f64 {
        self.mollified.alpha()
    }

    fn level(&self) -> u32 {
        self.mollified.level() + 1
    }

    fn velocity(&self, t: f64) -> Result<Field> {
        Ok(self.mollified.u_ell(t)?.add(&self.perturbation(t)?.total()?)?)
    }

    fn stress(&self, t: f64) -> Result<Field> {
        self.state(t)?.decomposition.r_next()
    }

    fn pressure(&self, t: f64) -> Result<Field> {
        let s = self.state(t)?;
        let u = s.u_ell.add(&s.perturbation.total()?)?;
        let src = div_div(&s.decomposition.r_next()?)?.sub(&divergence(&div_outer(&u, &u)?)?)?;
        Ok(inverse_laplacian(&src))
    }

    fn time_support(&self) -> (f64, f64) {
        self.cutoff.support()
    }

    fn time_step(&self) -> f64 {
        self.step
    }
}

/// `∂_t u_{q+1}` at the level's own step, for diagnostics.
pub fn velocity_dt(level: &NextLevel, t: f64) -> Result<Field> {
    field_derivative(|s| level.velocity(s), t, level.time_step())
}
