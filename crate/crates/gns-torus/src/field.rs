use num_complex::Complex64;
use rayon::prelude::*;

use crate::{Grid, TorusError};

/// Tensor rank of a field.
///
/// Symmetric traceless tensors store `(R₁₁, R₁₂)`; `R₂₂ = −R₁₁` and
/// `R₂₁ = R₁₂` are implied, so symmetry and tracelessness hold by storage.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rank {
    Scalar,
    Vector,
    SymTraceless,
}

impl Rank {
    pub fn components(self) -> usize {
        match self {
            Rank::Scalar => 1,
            Rank::Vector | Rank::SymTraceless => 2,
        }
    }

    pub fn code(self) -> u32 {
        match self {
            Rank::Scalar => 0,
            Rank::Vector => 1,
            Rank::SymTraceless => 2,
        }
    }

    pub fn from_code(c: u32) -> Option<Self> {
        match c {
            0 => Some(Rank::Scalar),
            1 => Some(Rank::Vector),
            2 => Some(Rank::SymTraceless),
            _ => None,
        }
    }
}

/// Real samples of a scalar, vector or symmetric traceless field.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    grid: Grid,
    rank: Rank,
    comps: Vec<Vec<f64>>,
}

/// Fourier coefficients of a field, component by component.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    grid: Grid,
    rank: Rank,
    comps: Vec<Vec<Complex64>>,
}

pub(crate) fn expect_rank(found: Rank, expected: Rank) -> Result<(), TorusError> {
    if found == expected {
        Ok(())
    } else {
        Err(TorusError::Rank { expected, found })
    }
}

impl Field {
    pub fn zeros(grid: &Grid, rank: Rank) -> Self {
        Self { grid: grid.clone(), rank, comps: vec![vec![0.0; grid.len()]; rank.components()] }
    }

    pub fn from_components(grid: &Grid, rank: Rank, comps: Vec<Vec<f64>>) -> Result<Self, TorusError> {
        if comps.len() != rank.components() || comps.iter().any(|c| c.len() != grid.len()) {
            return Err(TorusError::Shape);
        }
        Ok(Self { grid: grid.clone(), rank, comps })
    }

    pub fn scalar(grid: &Grid, values: Vec<f64>) -> Result<Self, TorusError> {
        Self::from_components(grid, Rank::Scalar, vec![values])
    }

    pub fn vector(grid: &Grid, v1: Vec<f64>, v2: Vec<f64>) -> Result<Self, TorusError> {
        Self::from_components(grid, Rank::Vector, vec![v1, v2])
    }

    /// Samples `f(x₁, x₂)` for each component.
    pub fn from_fn<F>(grid: &Grid, rank: Rank, f: F) -> Self
    where
        F: Fn(f64, f64) -> [f64; 2] + Sync,
    {
        let nc = rank.components();
        let pts: Vec<[f64; 2]> = (0..grid.len())
            .into_par_iter()
            .map(|idx| {
                let (x1, x2) = grid.point(idx);
                f(x1, x2)
            })
            .collect();
        let comps = (0..nc).map(|c| pts.iter().map(|p| p[c]).collect()).collect();
        Self { grid: grid.clone(), rank, comps }
    }

    pub fn scalar_fn<F: Fn(f64, f64) -> f64 + Sync>(grid: &Grid, f: F) -> Self {
        Self::from_fn(grid, Rank::Scalar, |x, y| [f(x, y), 0.0])
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn rank(&self) -> Rank {
        self.rank
    }

    pub fn comp(&self, c: usize) -> &[f64] {
        &self.comps[c]
    }

    pub fn comp_mut(&mut self, c: usize) -> &mut [f64] {
        &mut self.comps[c]
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.comps
    }

    pub fn into_components(self) -> Vec<Vec<f64>> {
        self.comps
    }

    /// Scalar component `c` as its own field.
    pub fn component_field(&self, c: usize) -> Field {
        Field { grid: self.grid.clone(), rank: Rank::Scalar, comps: vec![self.comps[c].clone()] }
    }

    pub fn spectrum(&self) -> Spectrum {
        let comps = self
            .comps
            .iter()
            .map(|c| {
                let mut buf: Vec<Complex64> = c.iter().map(|&v| Complex64::new(v, 0.0)).collect();
                self.grid.fft2(&mut buf, false);
                buf
            })
            .collect();
        Spectrum { grid: self.grid.clone(), rank: self.rank, comps }
    }

    fn check_same(&self, other: &Field) -> Result<(), TorusError> {
        if self.grid != other.grid {
            return Err(TorusError::GridMismatch);
        }
        expect_rank(other.rank, self.rank)
    }

    fn zip_map(&self, other: &Field, f: impl Fn(f64, f64) -> f64 + Sync) -> Result<Field, TorusError> {
        self.check_same(other)?;
        let comps = self
            .comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| a.par_iter().zip(b.par_iter()).map(|(x, y)| f(*x, *y)).collect())
            .collect();
        Ok(Field { grid: self.grid.clone(), rank: self.rank, comps })
    }

    pub fn add(&self, other: &Field) -> Result<Field, TorusError> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Field) -> Result<Field, TorusError> {
        self.zip_map(other, |a, b| a - b)
    }

    /// `self + s·other`.
    pub fn axpy(&self, s: f64, other: &Field) -> Result<Field, TorusError> {
        self.zip_map(other, |a, b| a + s * b)
    }

    pub fn add_assign(&mut self, other: &Field) -> Result<(), TorusError> {
        self.check_same(other)?;
        for (a, b) in self.comps.iter_mut().zip(&other.comps) {
            a.par_iter_mut().zip(b.par_iter()).for_each(|(x, y)| *x += y);
        }
        Ok(())
    }

    pub fn scale(&self, s: f64) -> Field {
        self.map(|v| s * v)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64 + Sync) -> Field {
        let comps = self.comps.iter().map(|c| c.par_iter().map(|v| f(*v)).collect()).collect();
        Field { grid: self.grid.clone(), rank: self.rank, comps }
    }

    /// Pointwise product with a scalar field.
    pub fn mul_scalar(&self, s: &Field) -> Result<Field, TorusError> {
        expect_rank(s.rank, Rank::Scalar)?;
        if self.grid != s.grid {
            return Err(TorusError::GridMismatch);
        }
        let w = &s.comps[0];
        let comps = self
            .comps
            .iter()
            .map(|c| c.par_iter().zip(w.par_iter()).map(|(a, b)| a * b).collect())
            .collect();
        Ok(Field { grid: self.grid.clone(), rank: self.rank, comps })
    }

    /// Scalar field times a constant vector.
    pub fn times_vector(&self, v: [f64; 2]) -> Result<Field, TorusError> {
        expect_rank(self.rank, Rank::Scalar)?;
        let s = &self.comps[0];
        Ok(Field {
            grid: self.grid.clone(),
            rank: Rank::Vector,
            comps: vec![s.par_iter().map(|x| x * v[0]).collect(), s.par_iter().map(|x| x * v[1]).collect()],
        })
    }

    /// Scalar field times a constant symmetric traceless matrix `(m₁₁, m₁₂)`.
    pub fn times_tensor(&self, m: [f64; 2]) -> Result<Field, TorusError> {
        expect_rank(self.rank, Rank::Scalar)?;
        let s = &self.comps[0];
        Ok(Field {
            grid: self.grid.clone(),
            rank: Rank::SymTraceless,
            comps: vec![s.par_iter().map(|x| x * m[0]).collect(), s.par_iter().map(|x| x * m[1]).collect()],
        })
    }

    /// Euclidean inner product of two vector fields.
    pub fn dot(&self, other: &Field) -> Result<Field, TorusError> {
        expect_rank(self.rank, Rank::Vector)?;
        self.check_same(other)?;
        let (a, b) = (&self.comps, &other.comps);
        let v = (0..self.grid.len()).into_par_iter().map(|i| a[0][i] * b[0][i] + a[1][i] * b[1][i]).collect();
        Ok(Field { grid: self.grid.clone(), rank: Rank::Scalar, comps: vec![v] })
    }

    /// Traceless part of the symmetrized product, `½(u⊗v + v⊗u) − ½(u·v)Id`.
    pub fn sym_outer(&self, other: &Field) -> Result<Field, TorusError> {
        expect_rank(self.rank, Rank::Vector)?;
        self.check_same(other)?;
        let (u, v) = (&self.comps, &other.comps);
        let n = self.grid.len();
        let r11 = (0..n).into_par_iter().map(|i| 0.5 * (u[0][i] * v[0][i] - u[1][i] * v[1][i])).collect();
        let r12 = (0..n).into_par_iter().map(|i| 0.5 * (u[0][i] * v[1][i] + u[1][i] * v[0][i])).collect();
        Ok(Field { grid: self.grid.clone(), rank: Rank::SymTraceless, comps: vec![r11, r12] })
    }

    /// Per-component spatial mean.
    pub fn mean(&self) -> Vec<f64> {
        self.comps.iter().map(|c| crate::norms::ordered_sum(c) / c.len() as f64).collect()
    }

    /// Pointwise magnitude: `|f|`, `|v|` or the Frobenius norm `√(2R₁₁² + 2R₁₂²)`.
    pub fn magnitude(&self) -> Vec<f64> {
        let c = &self.comps;
        let n = self.grid.len();
        match self.rank {
            Rank::Scalar => c[0].par_iter().map(|v| v.abs()).collect(),
            Rank::Vector => (0..n).into_par_iter().map(|i| c[0][i].hypot(c[1][i])).collect(),
            Rank::SymTraceless => {
                (0..n).into_par_iter().map(|i| std::f64::consts::SQRT_2 * c[0][i].hypot(c[1][i])).collect()
            }
        }
    }

    pub fn sup(&self) -> f64 {
        self.magnitude().into_iter().fold(0.0, f64::max)
    }

    /// Largest absolute difference between two fields, over all components.
    pub fn max_abs_diff(&self, other: &Field) -> Result<f64, TorusError> {
        Ok(self.sub(other)?.sup())
    }
}

impl Spectrum {
    pub fn zeros(grid: &Grid, rank: Rank) -> Self {
        Self {
            grid: grid.clone(),
            rank,
            comps: vec![vec![Complex64::default(); grid.len()]; rank.components()],
        }
    }

    pub fn from_components(grid: &Grid, rank: Rank, comps: Vec<Vec<Complex64>>) -> Result<Self, TorusError> {
        if comps.len() != rank.components() || comps.iter().any(|c| c.len() != grid.len()) {
            return Err(TorusError::Shape);
        }
        Ok(Self { grid: grid.clone(), rank, comps })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn rank(&self) -> Rank {
        self.rank
    }

    pub fn comp(&self, c: usize) -> &[Complex64] {
        &self.comps[c]
    }

    pub fn comp_mut(&mut self, c: usize) -> &mut [Complex64] {
        &mut self.comps[c]
    }

    /// Coefficient of integer frequency `(k₁, k₂)` in component `c`.
    pub fn coeff(&self, c: usize, k1: i64, k2: i64) -> Complex64 {
        let n = self.grid.n();
        self.comps[c][self.grid.index_of(k1) * n + self.grid.index_of(k2)]
    }

    /// Back to real samples, discarding the imaginary residue.
    pub fn to_field(&self) -> Field {
        let comps = self
            .comps
            .iter()
            .map(|c| {
                let mut buf = c.clone();
                self.grid.fft2(&mut buf, true);
                buf.into_iter().map(|z| z.re).collect()
            })
            .collect();
        Field { grid: self.grid.clone(), rank: self.rank, comps }
    }

    /// Largest deviation from Hermitian symmetry `f̂(−ξ) = conj f̂(ξ)`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.grid.n();
        let mut worst = 0.0f64;
        for c in &self.comps {
            for i in 0..n {
                for j in 0..n {
                    let a = c[i * n + j];
                    let b = c[((n - i) % n) * n + (n - j) % n];
                    worst = worst.max((a - b.conj()).norm());
                }
            }
        }
        worst
    }

    /// Spectral `ℓ²` norm `(Σ_ξ |f̂(ξ)|²)^{1/2}` over all components.
    pub fn l2(&self) -> f64 {
        let s: Vec<f64> = self.comps.iter().map(|c| crate::norms::ordered_sum(&c.iter().map(|z| z.norm_sqr()).collect::<Vec<_>>())).collect();
        let w = if self.rank == Rank::SymTraceless { 2.0 } else { 1.0 };
        (w * s.iter().sum::<f64>()).sqrt()
    }
}
