//! One step `q → q+1` of the convex-integration scheme on the grid.
//!
//! Every level is a [`Relaxed`] solution evaluated lazily in time: the
//! initial state is separable in `(t, x)`, the mollified state is a finite
//! time convolution of its parent, and the next level rebuilds the
//! perturbation and its stress at each requested instant. Time derivatives
//! of the building blocks and of the amplitudes are analytic; the
//! substitution checks differentiate the assembled fields by
//! Richardson-extrapolated central differences.

pub mod amplitudes;
pub mod initial;
pub mod mollified;
pub mod next;
pub mod perturbation;
pub mod relaxed;
pub mod report;
pub mod util;

pub use amplitudes::{amplitude_rates, build_amplitudes, chi, smooth_step, AmplitudeSet, TimeCutoff};
pub use initial::{initial_step, InitialState, TimeProfile};
pub use mollified::{mollify_state, Mollified};
pub use next::{assemble_next, NextLevel, StepConfig, StressDecomposition};
pub use perturbation::{build_perturbations, Perturbation};
pub use relaxed::{nsr_residual, sample, Relaxed, Residual, SampledSolution};
pub use report::{measure_step, ReportRow, StepReport};

use gns_blocks::BlockError;
use gns_torus::TorusError;

#[derive(Debug, thiserror::Error)]
pub enum IterationError {
    #[error("velocity is not divergence-free: {div:e} exceeds {tol:e}")]
    NotDivergenceFree { div: f64, tol: f64 },
    #[error("velocity mean {mean:e} exceeds {tol:e}")]
    NotMeanFree { mean: f64, tol: f64 },
    #[error("amplitude construction failed at t = {t}: {msg}")]
    Construction { t: f64, msg: String },
    #[error("resolution: {0}")]
    Resolution(String),
    #[error(transparent)]
    Torus(#[from] TorusError),
    #[error(transparent)]
    Blocks(#[from] BlockError),
}

pub type Result<T> = std::result::Result<T, IterationError>;
