//! Periodic fields on the unit torus `𝕋² = ℝ²/ℤ²`.
//!
//! Fields are sampled on a uniform power-of-two grid and differentiated
//! spectrally. All operators are Fourier multipliers; the `2π` factors of the
//! side-one torus live inside the multipliers, so a mode `e^{2πiξ·x}` has
//! gradient `2πiξ` times itself.
//!
//! Reductions are chunked in a fixed order, so every result is bitwise
//! reproducible regardless of the rayon pool size.

mod field;
mod grid;
pub mod mollify;
pub mod norms;
pub mod ops;
pub mod random;
pub mod snapshot;
pub mod time;

pub use field::{Field, Rank, Spectrum};
pub use grid::Grid;
pub use mollify::{SpatialMollifier, TimeKernel};
pub use norms::NormSpec;
pub use time::TimeSampledField;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TorusError {
    #[error("grid size {0} must be a power of two and at least 8")]
    GridSize(usize),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("expected a {expected:?} field, found {found:?}")]
    Rank { expected: Rank, found: Rank },
    #[error("component count or length does not match the grid")]
    Shape,
    #[error("field mean {mean:e} exceeds the tolerance {tol:e}")]
    NonzeroMean { mean: f64, tol: f64 },
    #[error("fractional exponent must be nonnegative, got {0}")]
    NegativeExponent(f64),
    #[error("unsupported norm descriptor `{0}`")]
    UnsupportedNorm(String),
    #[error("mollification radius {ell:e} is below the time spacing {dt:e}")]
    UnderResolvedTime { ell: f64, dt: f64 },
    #[error("time samples: {0}")]
    TimeSamples(String),
    #[error("snapshot: {0}")]
    Snapshot(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
