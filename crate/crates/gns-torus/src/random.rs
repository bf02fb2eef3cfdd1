//! Seeded random band-limited fields.

use num_complex::Complex64;
use rand::Rng;

use crate::{ops, Field, Grid, Rank, Spectrum, TorusError};

/// Real field with independent uniform coefficients on the box
/// `0 < max(|ξ₁|, |ξ₂|) ≤ band`, so the mean is zero. Coefficients are drawn
/// in a fixed order, making the field a pure function of the RNG state.
pub fn band_limited<R: Rng>(grid: &Grid, rank: Rank, band: i64, rng: &mut R) -> Field {
    let n = grid.n();
    let band = band.min(n as i64 / 2 - 1);
    let mut s = Spectrum::zeros(grid, rank);
    for c in 0..rank.components() {
        let data = s.comp_mut(c);
        for k1 in -band..=band {
            for k2 in -band..=band {
                // One draw per ± pair fixes Hermitian symmetry.
                if (k1, k2) <= (0, 0) {
                    continue;
                }
                let z = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                data[grid.index_of(k1) * n + grid.index_of(k2)] = z;
                data[grid.index_of(-k1) * n + grid.index_of(-k2)] = z.conj();
            }
        }
    }
    s.to_field()
}

/// Mean-free divergence-free vector field `∇⊥ψ` for random band-limited `ψ`,
/// scaled to unit sup norm.
pub fn divergence_free<R: Rng>(grid: &Grid, band: i64, rng: &mut R) -> Result<Field, TorusError> {
    let psi = band_limited(grid, Rank::Scalar, band, rng);
    let v = ops::perp_gradient(&psi)?;
    let s = v.sup();
    Ok(if s > 0.0 { v.scale(1.0 / s) } else { v })
}
