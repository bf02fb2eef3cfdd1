use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::TorusError;

/// Uniform `n × n` grid on the unit torus `ℝ²/ℤ²`.
///
/// Sample `(i, j)` sits at `x = (i/n, j/n)` and is stored at `i·n + j`, so the
/// first array index runs along `x₁`. Frequencies are integer vectors `ξ` and
/// a mode reads `e^{2πi ξ·x}`.
#[derive(Clone)]
pub struct Grid {
    n: usize,
    plans: Arc<Plans>,
}

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
    }
}

impl Eq for Grid {}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Grid({}x{})", self.n, self.n)
    }
}

impl Grid {
    pub fn new(n: usize) -> Result<Self, TorusError> {
        if n < 8 || !n.is_power_of_two() {
            return Err(TorusError::GridSize(n));
        }
        let mut planner = FftPlanner::new();
        let plans = Plans { forward: planner.plan_fft_forward(n), inverse: planner.plan_fft_inverse(n) };
        Ok(Self { n, plans: Arc::new(plans) })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// Coordinates of the sample at flat index `idx`.
    pub fn point(&self, idx: usize) -> (f64, f64) {
        let h = self.spacing();
        ((idx / self.n) as f64 * h, (idx % self.n) as f64 * h)
    }

    /// Signed integer frequency of array index `i`; the Nyquist index maps
    /// to `−n/2`.
    pub fn wavenumber(&self, i: usize) -> i64 {
        let n = self.n as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    /// Differentiation symbol `κ(i)`: the frequency, except `0` at Nyquist
    /// where the mode has no real-valued derivative.
    pub fn kappa(&self, i: usize) -> f64 {
        if i == self.n / 2 {
            0.0
        } else {
            self.wavenumber(i) as f64
        }
    }

    /// Array index holding the integer frequency `k`.
    pub fn index_of(&self, k: i64) -> usize {
        k.rem_euclid(self.n as i64) as usize
    }

    /// Largest retained frequency under the two-thirds rule.
    pub fn dealias_band(&self) -> i64 {
        ((self.n - 1) / 3) as i64
    }

    /// In-place 2D transform. The forward direction is normalized by `1/n²`
    /// so the result holds the Fourier coefficients `⨍ f e^{−2πiξ·x}`.
    pub fn fft2(&self, data: &mut [Complex64], inverse: bool) {
        let n = self.n;
        assert_eq!(data.len(), n * n);
        let plan = if inverse { &self.plans.inverse } else { &self.plans.forward };
        let rows = |buf: &mut [Complex64]| {
            buf.par_chunks_mut(n * 8.min(n)).for_each(|block| {
                let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
                for row in block.chunks_mut(n) {
                    plan.process_with_scratch(row, &mut scratch);
                }
            });
        };
        rows(data);
        let mut t = transpose(data, n);
        rows(&mut t);
        let back = transpose(&t, n);
        if inverse {
            data.copy_from_slice(&back);
        } else {
            let s = 1.0 / (n * n) as f64;
            data.par_iter_mut().zip(back.par_iter()).for_each(|(d, b)| *d = b * s);
        }
    }
}

fn transpose(src: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::default(); n * n];
    out.par_chunks_mut(n).enumerate().for_each(|(j, row)| {
        for (i, v) in row.iter_mut().enumerate() {
            *v = src[i * n + j];
        }
    });
    out
}
