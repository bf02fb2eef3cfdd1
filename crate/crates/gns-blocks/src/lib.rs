//! Intermittent building blocks: Mikado-type jets with their correctors and
//! potentials, and the temporal oscillators that switch them on and off.
//!
//! Closed-form evaluators sit alongside band-limited grid versions whose
//! Fourier coefficients are computed once from the one-dimensional profiles.

pub mod identities;
pub mod jet;
pub mod profile;
pub mod quad;
pub mod scales;
pub mod sweep;
pub mod temporal;

pub use jet::{BlockKind, GridJet, Jet};
pub use profile::{make_profiles, rescale_profile, Profile, ProfileKind, Rescaled};
pub use scales::JetScales;
pub use sweep::{scaling_sweep, SweepPoint, SweepResult};
pub use temporal::{make_temporal, TemporalPattern};

use gns_torus::TorusError;

#[derive(Debug, thiserror::Error)]
pub enum BlockError {
    #[error("scale error: {0}")]
    Scale(String),
    #[error("grid {n} cannot resolve the block, need at least {required}")]
    UnderResolved { n: usize, required: usize },
    #[error("band {band} outside the admissible range [1, {limit}]")]
    Band { band: i64, limit: i64 },
    #[error("temporal supports overlap: {0}")]
    Overlap(String),
    #[error("a scaling sweep needs at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error(transparent)]
    Torus(#[from] TorusError),
}
