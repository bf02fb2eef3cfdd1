//! Time-sampled fields and finite-difference time derivatives.

use crate::{Field, TorusError};

/// A field sampled at increasing instants, with quadrature weights for
/// `∫ · dt`.
#[derive(Clone, Debug)]
pub struct TimeSampledField {
    times: Vec<f64>,
    frames: Vec<Field>,
    weights: Vec<f64>,
}

/// Trapezoid weights for arbitrary increasing nodes.
pub fn trapezoid_weights(times: &[f64]) -> Vec<f64> {
    let m = times.len();
    let mut w = vec![0.0; m];
    for i in 1..m {
        let h = times[i] - times[i - 1];
        w[i - 1] += 0.5 * h;
        w[i] += 0.5 * h;
    }
    w
}

impl TimeSampledField {
    /// Frames with trapezoid weights.
    pub fn new(times: Vec<f64>, frames: Vec<Field>) -> Result<Self, TorusError> {
        let w = trapezoid_weights(&times);
        Self::with_weights(times, frames, w)
    }

    pub fn with_weights(times: Vec<f64>, frames: Vec<Field>, weights: Vec<f64>) -> Result<Self, TorusError> {
        if times.is_empty() || times.len() != frames.len() || times.len() != weights.len() {
            return Err(TorusError::TimeSamples("times, frames and weights must have equal nonzero length".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(TorusError::TimeSamples("times must be strictly increasing".into()));
        }
        let (g, r) = (frames[0].grid(), frames[0].rank());
        if frames.iter().any(|f| f.grid() != g || f.rank() != r) {
            return Err(TorusError::TimeSamples("frames must share one grid and rank".into()));
        }
        Ok(Self { times, frames, weights })
    }

    /// Samples `f` at the given times.
    pub fn sample<F>(times: Vec<f64>, f: F) -> Result<Self, TorusError>
    where
        F: Fn(f64) -> Result<Field, TorusError>,
    {
        let frames = times.iter().map(|&t| f(t)).collect::<Result<Vec<_>, _>>()?;
        Self::new(times, frames)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn frames(&self) -> &[Field] {
        &self.frames
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Uniform spacing, if the samples are uniform to 1e−9 relative.
    pub fn uniform_step(&self) -> Option<f64> {
        if self.times.len() < 2 {
            return None;
        }
        let h = (self.times[self.times.len() - 1] - self.times[0]) / (self.times.len() - 1) as f64;
        let ok = self.times.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h);
        ok.then_some(h)
    }

    pub fn map_frames<F>(&self, f: F) -> Result<Self, TorusError>
    where
        F: Fn(&Field) -> Result<Field, TorusError>,
    {
        let frames = self.frames.iter().map(f).collect::<Result<Vec<_>, _>>()?;
        Self::with_weights(self.times.clone(), frames, self.weights.clone())
    }

    /// Fourth-order finite-difference time derivative on uniform samples,
    /// with a Richardson error estimate `max ‖D_h − D_{2h}‖∞ / 15` over the
    /// interior points where both stencils fit.
    pub fn time_derivative(&self) -> Result<(Self, f64), TorusError> {
        let h = self
            .uniform_step()
            .ok_or_else(|| TorusError::TimeSamples("time derivative needs uniform samples".into()))?;
        let m = self.len();
        if m < 5 {
            return Err(TorusError::TimeSamples("time derivative needs at least 5 samples".into()));
        }
        let f = &self.frames;
        let comb = |c: &[(usize, f64)], scale: f64| -> Result<Field, TorusError> {
            let mut acc = f[c[0].0].scale(c[0].1);
            for &(i, w) in &c[1..] {
                acc = acc.axpy(w, &f[i])?;
            }
            Ok(acc.scale(scale))
        };
        let mut out = Vec::with_capacity(m);
        for i in 0..m {
            // Central stencil in the interior, the quartic through the five
            // nearest samples at the ends.
            let st: Vec<(usize, f64)> = if i >= 2 && i + 2 < m {
                vec![(i - 2, 1.0), (i - 1, -8.0), (i + 1, 8.0), (i + 2, -1.0)]
            } else {
                let base = if i < 2 { 0 } else { m - 5 };
                let w = lagrange_derivative_weights(5, (i - base) as f64);
                w.into_iter().enumerate().map(|(k, w)| (base + k, 12.0 * w)).collect()
            };
            out.push(comb(&st, 1.0 / (12.0 * h))?);
        }
        let mut err = 0.0f64;
        for i in 4..m.saturating_sub(4) {
            let d2 = comb(&[(i - 4, 1.0), (i - 2, -8.0), (i + 2, 8.0), (i + 4, -1.0)], 1.0 / (24.0 * h))?;
            err = err.max(out[i].max_abs_diff(&d2)? / 15.0);
        }
        Ok((Self::with_weights(self.times.clone(), out, self.weights.clone())?, err))
    }
}

/// Weights `w_k` such that `Σ w_k f(t₀ + k h) ≈ h f′(t₀ + s h)` for the
/// interpolating polynomial through `count` equispaced nodes.
fn lagrange_derivative_weights(count: usize, s: f64) -> Vec<f64> {
    (0..count)
        .map(|k| {
            let kf = k as f64;
            let denom: f64 = (0..count).filter(|&j| j != k).map(|j| kf - j as f64).product();
            let mut num = 0.0;
            for m in (0..count).filter(|&m| m != k) {
                let prod: f64 = (0..count).filter(|&j| j != k && j != m).map(|j| s - j as f64).product();
                num += prod;
            }
            num / denom
        })
        .collect()
}

/// Fourth-order central derivative of `f` at `t` with step `h`, improved by
/// one Richardson step against step `h/2`. Returns the sixth-order value and
/// the estimated error of the fourth-order one.
pub fn central_derivative<F>(f: F, t: f64, h: f64) -> Result<(Field, f64), TorusError>
where
    F: Fn(f64) -> Result<Field, TorusError>,
{
    let d = |h: f64| -> Result<Field, TorusError> {
        let a = f(t - 2.0 * h)?;
        let b = f(t - h)?;
        let c = f(t + h)?;
        let e = f(t + 2.0 * h)?;
        Ok(a.axpy(-8.0, &b)?.axpy(8.0, &c)?.axpy(-1.0, &e)?.scale(1.0 / (12.0 * h)))
    };
    let coarse = d(h)?;
    let fine = d(0.5 * h)?;
    let diff = fine.sub(&coarse)?;
    let err = diff.sup() / 15.0;
    Ok((fine.axpy(1.0 / 15.0, &diff)?, err))
}
