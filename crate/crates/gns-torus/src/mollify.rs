//! Space and time mollifiers built from the bump `exp(−1/(1−s²))`.

use num_complex::Complex64;

use crate::{Field, Grid, TimeSampledField, TorusError};

/// The unnormalized bump `exp(−1/(1−s²))` on `|s| < 1`.
pub fn bump(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - s * s)).exp()
    }
}

/// Spatial convolution with the radial bump of radius `ℓ`, sampled on the
/// grid and normalized to unit discrete mass. Applied as its (real, even)
/// Fourier multiplier.
#[derive(Clone, Debug)]
pub struct SpatialMollifier {
    ell: f64,
    grid: Grid,
    multiplier: Vec<f64>,
    support_points: usize,
}

impl SpatialMollifier {
    pub fn new(grid: &Grid, ell: f64) -> Self {
        let n = grid.n();
        let h = grid.spacing();
        let mut kernel = vec![0.0; grid.len()];
        for i in 0..n {
            for j in 0..n {
                // Shortest periodic displacement from the origin.
                let dx = grid.wavenumber(i) as f64 * h;
                let dy = grid.wavenumber(j) as f64 * h;
                kernel[i * n + j] = bump((dx * dx + dy * dy).sqrt() / ell);
            }
        }
        let support_points = kernel.iter().filter(|&&v| v > 0.0).count();
        if support_points == 0 {
            kernel[0] = 1.0;
        }
        let mass: f64 = kernel.iter().sum();
        let mut buf: Vec<Complex64> = kernel.iter().map(|&v| Complex64::new(v / mass, 0.0)).collect();
        grid.fft2(&mut buf, false);
        // Convolution on the unit torus multiplies coefficients by n²·k̂.
        let scale = grid.len() as f64;
        let multiplier = buf.iter().map(|z| z.re * scale).collect();
        Self { ell, grid: grid.clone(), multiplier, support_points: support_points.max(1) }
    }

    pub fn ell(&self) -> f64 {
        self.ell
    }

    /// The kernel's Fourier value at integer frequency `ξ`.
    pub fn fourier_value(&self, xi: [i64; 2]) -> f64 {
        let n = self.grid.n();
        self.multiplier[self.grid.index_of(xi[0]) * n + self.grid.index_of(xi[1])]
    }

    /// `Some(note)` when the kernel covers too few samples to be smooth.
    pub fn resolution_warning(&self) -> Option<String> {
        (self.ell < 2.0 * self.grid.spacing()).then(|| {
            format!(
                "mollifier radius {:e} spans {} grid samples; kernel is under-resolved",
                self.ell, self.support_points
            )
        })
    }

    pub fn apply(&self, f: &Field) -> Result<Field, TorusError> {
        if f.grid() != &self.grid {
            return Err(TorusError::GridMismatch);
        }
        let mut s = f.spectrum();
        for c in 0..f.rank().components() {
            for (z, m) in s.comp_mut(c).iter_mut().zip(&self.multiplier) {
                *z *= *m;
            }
        }
        Ok(s.to_field())
    }
}

/// Discrete time convolution `f_ℓ(t) = Σⱼ wⱼ f(t − sⱼ)` with equispaced
/// offsets `sⱼ ∈ (−ℓ, ℓ)` and bump weights of unit sum.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeKernel {
    ell: f64,
    offsets: Vec<f64>,
    weights: Vec<f64>,
}

impl TimeKernel {
    /// `2m − 1` interior nodes at spacing `ℓ/m`.
    pub fn new(ell: f64, m: usize) -> Self {
        let m = m.max(1) as i64;
        let h = ell / m as f64;
        let offsets: Vec<f64> = (1 - m..m).map(|j| j as f64 * h).collect();
        let raw: Vec<f64> = (1 - m..m).map(|j| bump(j as f64 / m as f64)).collect();
        let mass: f64 = raw.iter().sum();
        Self { ell, offsets, weights: raw.iter().map(|w| w / mass).collect() }
    }

    pub fn ell(&self) -> f64 {
        self.ell
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Mollifies a lazily evaluated field at `t`.
    pub fn apply_fn<F>(&self, f: F, t: f64) -> Result<Field, TorusError>
    where
        F: Fn(f64) -> Result<Field, TorusError>,
    {
        let mut acc: Option<Field> = None;
        for (s, w) in self.offsets.iter().zip(&self.weights) {
            let v = f(t - s)?;
            acc = Some(match acc {
                None => v.scale(*w),
                Some(a) => a.axpy(*w, &v)?,
            });
        }
        Ok(acc.expect("kernel has at least one node"))
    }

    /// Mollifies uniformly sampled frames; samples outside the window count as
    /// zero. The kernel nodes are the sample offsets inside `(−ℓ, ℓ)`.
    pub fn apply_sampled(f: &TimeSampledField, ell: f64) -> Result<TimeSampledField, TorusError> {
        let dt = f
            .uniform_step()
            .ok_or_else(|| TorusError::TimeSamples("time mollification needs uniform samples".into()))?;
        if ell <= dt {
            return Err(TorusError::UnderResolvedTime { ell, dt });
        }
        let m = (ell / dt).ceil() as i64;
        let raw: Vec<f64> = (-m..=m).map(|j| bump(j as f64 * dt / ell)).collect();
        let mass: f64 = raw.iter().sum();
        let frames = f.frames();
        let len = frames.len() as i64;
        let mut out = Vec::with_capacity(frames.len());
        for i in 0..len {
            let mut acc = Field::zeros(frames[0].grid(), frames[0].rank());
            for (j, w) in (-m..=m).zip(&raw) {
                let k = i - j;
                if *w > 0.0 && (0..len).contains(&k) {
                    acc = acc.axpy(w / mass, &frames[k as usize])?;
                }
            }
            out.push(acc);
        }
        TimeSampledField::with_weights(f.times().to_vec(), out, f.weights().to_vec())
    }
}

/// Space then time mollification of sampled frames.
pub fn mollify(f: &TimeSampledField, ell: f64) -> Result<TimeSampledField, TorusError> {
    let sp = SpatialMollifier::new(f.frames()[0].grid(), ell);
    let spaced = f.map_frames(|fr| sp.apply(fr))?;
    TimeKernel::apply_sampled(&spaced, ell)
}
