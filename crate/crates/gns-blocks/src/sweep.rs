//! Power-law sweeps of block norms against `λ`.
//!
//! The measured norms come from exact quadrature at the realized scales.
//! Two predictions are reported: the nominal exponent from the rational
//! scale exponents, and the realized exponent, which is the log-log slope
//! of the scaling law evaluated at the rounded scales actually used.

use std::fmt::Write as _;

use gns_geometry::Direction;
use gns_params::{q_f64, ScaleSet};

use crate::jet::{BlockKind, Jet};
use crate::profile::Profile;
use crate::scales::JetScales;
use crate::temporal::TemporalPattern;
use crate::BlockError;

/// What a sweep measures.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SweepTarget {
    /// `‖∇^N ∂_t^M block‖_{C_t L^p_x}`.
    Block { kind: BlockKind, p: f64, n: u32, m: u32 },
    /// `‖∂_t^M g_(k)‖_{L^γ_t}`.
    Temporal { gamma: f64, m: u32 },
    /// `‖W^c‖_{L^p} / ‖W‖_{L^p}`.
    CorrectorRatio { p: f64 },
}

impl SweepTarget {
    pub fn label(&self) -> String {
        match self {
            SweepTarget::Block { kind, p, n, m } => format!("{kind:?}_p{p}_N{n}_M{m}").to_lowercase(),
            SweepTarget::Temporal { gamma, m } => format!("g_gamma{gamma}_M{m}"),
            SweepTarget::CorrectorRatio { p } => format!("corrector_ratio_p{p}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub lambda: f64,
    pub measured: f64,
    /// The scaling law at the realized scales, without constants.
    pub predicted: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub label: String,
    pub points: Vec<SweepPoint>,
    pub predicted_exponent: f64,
    pub nominal_exponent: f64,
    pub fitted_slope: f64,
}

impl SweepResult {
    pub fn slope_error(&self) -> f64 {
        (self.fitted_slope - self.predicted_exponent).abs()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("lambda,measured_norm,predicted_exponent,fitted_slope\n");
        for p in &self.points {
            let _ = writeln!(s, "{:e},{:e},{:e},{:e}", p.lambda, p.measured, self.predicted_exponent, self.fitted_slope);
        }
        s
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn nominal_exponent(target: SweepTarget, s: &ScaleSet) -> f64 {
    let e = &s.exponents;
    let (rp, rl, mu, tau, sigma) = (q_f64(e.r_perp), q_f64(e.r_par), q_f64(e.mu), q_f64(e.tau), q_f64(e.sigma));
    match target {
        SweepTarget::Block { kind, p, n, m } => {
            let base = (rp + rl) * (1.0 / p - 0.5) + n as f64 + m as f64 * (1.0 + rp + mu - rl);
            base + kind_exponent(kind, rp, rl)
        }
        SweepTarget::Temporal { gamma, m } => m as f64 * sigma + tau * (m as f64 + 0.5 - 1.0 / gamma),
        SweepTarget::CorrectorRatio { .. } => rp - rl,
    }
}

fn kind_exponent(kind: BlockKind, rp: f64, rl: f64) -> f64 {
    match kind {
        BlockKind::Jet => 0.0,
        BlockKind::Corrector => rp - rl,
        BlockKind::Potential => rp,
    }
}

fn measure(target: SweepTarget, s: &ScaleSet, dir: &Direction, n_lambda: i64, profile: &Profile) -> Result<SweepPoint, BlockError> {
    let js = JetScales::realize(s, n_lambda)?;
    let (rp, rl) = (js.r_perp, js.r_par);
    let lambda = js.lambda;
    match target {
        SweepTarget::Block { kind, p, n, m } => {
            let jet = Jet::new(dir.clone(), js.clone(), profile)?;
            let kf = match kind {
                BlockKind::Jet => 1.0,
                BlockKind::Corrector => rp / rl,
                BlockKind::Potential => rp,
            };
            let predicted = kf * (rp * rl).powf(1.0 / p - 0.5) * lambda.powi(n as i32) * (lambda * rp * js.mu / rl).powi(m as i32);
            Ok(SweepPoint { lambda, measured: jet.norm(kind, n, m, p)?, predicted })
        }
        SweepTarget::Temporal { gamma, m } => {
            let pat = TemporalPattern::standard(js.tau, js.sigma, 4)?;
            let sg = js.sigma as f64;
            let predicted = sg.powi(m as i32) * js.tau.powf(m as f64 + 0.5 - 1.0 / gamma);
            Ok(SweepPoint { lambda, measured: pat.lgamma_norm(0, m as usize, gamma), predicted })
        }
        SweepTarget::CorrectorRatio { p } => {
            let jet = Jet::new(dir.clone(), js.clone(), profile)?;
            let ratio = jet.norm(BlockKind::Corrector, 0, 0, p)? / jet.norm(BlockKind::Jet, 0, 0, p)?;
            Ok(SweepPoint { lambda, measured: ratio, predicted: rp / rl })
        }
    }
}

/// Measures `target` over the scale sets (one per `λ`, increasing) and fits
/// the log-log slope.
pub fn scaling_sweep(
    target: SweepTarget,
    scales: &[ScaleSet],
    direction: &Direction,
    n_lambda: i64,
    profile: &Profile,
) -> Result<SweepResult, BlockError> {
    if scales.len() < 4 {
        return Err(BlockError::TooFewPoints { needed: 4, got: scales.len() });
    }
    if scales.windows(2).any(|w| !(w[1].lambda > w[0].lambda)) {
        return Err(BlockError::Scale("sweep frequencies must increase strictly".into()));
    }
    let points = scales.iter().map(|s| measure(target, s, direction, n_lambda, profile)).collect::<Result<Vec<_>, _>>()?;
    let xs: Vec<f64> = points.iter().map(|p| p.lambda).collect();
    let measured: Vec<f64> = points.iter().map(|p| p.measured).collect();
    let predicted: Vec<f64> = points.iter().map(|p| p.predicted).collect();
    Ok(SweepResult {
        label: target.label(),
        predicted_exponent: loglog_slope(&xs, &predicted),
        nominal_exponent: nominal_exponent(target, &scales[0]),
        fitted_slope: loglog_slope(&xs, &measured),
        points,
    })
}
