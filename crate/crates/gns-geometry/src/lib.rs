//! Geometric decomposition of symmetric matrices near the identity.
//!
//! Four rational unit directions `k` with partners `k₁` give dyads
//! `D_i = k₁⊗k₁`. The redundancy among the four dyads is fixed by the basis
//! `{D₁, D₂, D₃−D₄}`, which makes every `γ_(k)²` an affine function of `R`
//! with rational coefficients. Reconstruction `R = Σ γ_(k)² D_k` is then an
//! identity in exact arithmetic.
//!
//! Partner convention: `k₁ = (k_y, −k_x)`, so that the rotation
//! `J(v) = (−v_y, v_x)` used by `∇⊥` maps `k₁ ↦ k` and `k ↦ −k₁`.

use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

pub type Q = Rational64;

/// Symmetric 2×2 matrix stored as `(m11, m12, m22)`.
pub type Sym2 = [f64; 3];
pub type Sym2Q = [Q; 3];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("matrix lies at Frobenius distance {distance:.6e} from Id, outside the certified radius {radius:.6e} (margin {margin:.3e})")]
    OutsideBall { distance: f64, radius: f64, margin: f64 },
    #[error("coefficient of direction {index} is non-positive ({value:.3e}) even though the matrix is inside the ball")]
    NonPositive { index: usize, value: f64 },
}

/// Frobenius norm of a symmetric matrix.
pub fn frobenius(m: &Sym2) -> f64 {
    (m[0] * m[0] + 2.0 * m[1] * m[1] + m[2] * m[2]).sqrt()
}

fn qf(x: Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// A rational direction `k ∈ 𝕊∩ℚ²` and its partner `k₁`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Direction {
    pub k: [Q; 2],
    pub k1: [Q; 2],
}

impl Direction {
    pub fn new(kx: Q, ky: Q) -> Self {
        Self { k: [kx, ky], k1: [ky, -kx] }
    }

    pub fn k_f64(&self) -> [f64; 2] {
        [qf(self.k[0]), qf(self.k[1])]
    }

    pub fn k1_f64(&self) -> [f64; 2] {
        [qf(self.k1[0]), qf(self.k1[1])]
    }

    /// `k₁⊗k₁` as `(d11, d12, d22)`.
    pub fn dyad(&self) -> Sym2Q {
        let [a, b] = self.k1;
        [a * a, a * b, b * b]
    }

    pub fn is_unit(&self) -> bool {
        let [a, b] = self.k;
        a * a + b * b == Q::one()
    }
}

/// `γ_(k)²(R) = base_k + linear_k · (R − Id)`, with the linear form acting
/// on `(d11, d12, d22)` of the offset.
#[derive(Clone, Debug, PartialEq)]
pub struct GammaDecomposition {
    pub base: Vec<Q>,
    pub linear: Vec<Sym2Q>,
}

impl GammaDecomposition {
    pub fn eval_exact(&self, r: &Sym2Q) -> Vec<Q> {
        let d = [r[0] - Q::one(), r[1], r[2] - Q::one()];
        self.base
            .iter()
            .zip(&self.linear)
            .map(|(b, l)| *b + l[0] * d[0] + l[1] * d[1] + l[2] * d[2])
            .collect()
    }

    pub fn eval(&self, r: &Sym2) -> Vec<f64> {
        let d = [r[0] - 1.0, r[1], r[2] - 1.0];
        self.base
            .iter()
            .zip(&self.linear)
            .map(|(b, l)| qf(*b) + qf(l[0]) * d[0] + qf(l[1]) * d[1] + qf(l[2]) * d[2])
            .collect()
    }

    /// Rate of change of each `γ²` along the Frobenius-unit direction `h`.
    pub fn slope(&self, h: &Sym2) -> Vec<f64> {
        self.linear
            .iter()
            .map(|l| qf(l[0]) * h[0] + qf(l[1]) * h[1] + qf(l[2]) * h[2])
            .collect()
    }
}

/// Solves a square rational system by Gauss–Jordan elimination.
pub fn solve_rational(mut a: Vec<Vec<Q>>, mut b: Vec<Q>) -> Option<Vec<Q>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        b.swap(col, piv);
        let p = a[col][col];
        for j in 0..n {
            a[col][j] /= p;
        }
        b[col] /= p;
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col];
                for j in 0..n {
                    let v = a[col][j];
                    a[r][j] -= f * v;
                }
                let v = b[col];
                b[r] -= f * v;
            }
        }
    }
    Some(b)
}

/// Rank of a rational matrix.
pub fn rational_rank(mut m: Vec<Vec<Q>>) -> usize {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..cols {
        let Some(piv) = (rank..rows).find(|&r| !m[r][col].is_zero()) else { continue };
        m.swap(rank, piv);
        for r in 0..rows {
            if r != rank && !m[r][col].is_zero() {
                let f = m[r][col] / m[rank][col];
                for j in 0..cols {
                    let v = m[rank][j];
                    m[r][j] -= f * v;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// The wavevector set with its integrality constant and certified ball.
#[derive(Clone, Debug, PartialEq)]
pub struct WavevectorSet {
    pub directions: Vec<Direction>,
    pub n_lambda: i64,
    pub decomposition: GammaDecomposition,
    /// Certified Frobenius radius around `Id`.
    pub c_r: f64,
    /// Estimated `Σ_k ‖γ_(k)‖_{C⁴}` over the certified ball.
    pub m_star: f64,
}

/// Fraction of the exact boundary radius kept as the certified radius.
const BALL_SAFETY: f64 = 0.98;

impl WavevectorSet {
    /// The four-direction set `(1,0), (0,1), (3/5,4/5), (3/5,−4/5)`.
    pub fn build() -> Self {
        let q = Q::new;
        let directions = vec![
            Direction::new(q(1, 1), q(0, 1)),
            Direction::new(q(0, 1), q(1, 1)),
            Direction::new(q(3, 5), q(4, 5)),
            Direction::new(q(3, 5), q(-4, 5)),
        ];
        let n_lambda = integrality_constant(&directions);
        let decomposition = decompose_affine(&directions);
        let mut set = Self { directions, n_lambda, decomposition, c_r: 0.0, m_star: f64::NAN };
        set.c_r = set.certify_ball();
        set.m_star = set.estimate_m_star(4096);
        set
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    /// Rank of the dyads viewed as vectors in the 3-dimensional symmetric space.
    pub fn dyad_rank(&self) -> usize {
        rational_rank(self.directions.iter().map(|d| d.dyad().to_vec()).collect())
    }

    /// `Σ γ_(k)² k₁⊗k₁`, evaluated exactly.
    pub fn reconstruct_exact(&self, coeffs: &[Q]) -> Sym2Q {
        let mut out = [Q::zero(); 3];
        for (c, d) in coeffs.iter().zip(&self.directions) {
            let dy = d.dyad();
            for i in 0..3 {
                out[i] += *c * dy[i];
            }
        }
        out
    }

    pub fn reconstruct(&self, coeffs: &[f64]) -> Sym2 {
        let mut out = [0.0; 3];
        for (c, d) in coeffs.iter().zip(&self.directions) {
            let [a, b] = d.k1_f64();
            out[0] += c * a * a;
            out[1] += c * a * b;
            out[2] += c * b * b;
        }
        out
    }

    /// The coefficients `γ_(k)²(R)`, rejecting matrices outside the ball.
    pub fn decompose(&self, r: &Sym2) -> Result<Vec<f64>, GeometryError> {
        let off = [r[0] - 1.0, r[1], r[2] - 1.0];
        let distance = frobenius(&off);
        if distance > self.c_r {
            return Err(GeometryError::OutsideBall {
                distance,
                radius: self.c_r,
                margin: distance - self.c_r,
            });
        }
        let g2 = self.decomposition.eval(r);
        if let Some((index, &value)) = g2.iter().enumerate().find(|(_, v)| **v <= 0.0) {
            return Err(GeometryError::NonPositive { index, value });
        }
        Ok(g2)
    }

    /// Positive square roots `γ_(k)(R)`.
    pub fn gammas(&self, r: &Sym2) -> Result<Vec<f64>, GeometryError> {
        Ok(self.decompose(r)?.into_iter().map(f64::sqrt).collect())
    }

    /// Analytic gradient of each `γ_(k) = √(affine)` with respect to
    /// `(m11, m12, m22)` treated as independent coordinates.
    pub fn gamma_gradients(&self, r: &Sym2) -> Result<Vec<[f64; 3]>, GeometryError> {
        let g = self.gammas(r)?;
        Ok(g.iter()
            .zip(&self.decomposition.linear)
            .map(|(g, l)| [qf(l[0]) / (2.0 * g), qf(l[1]) / (2.0 * g), qf(l[2]) / (2.0 * g)])
            .collect())
    }

    /// Distance to the positivity boundary along a Frobenius-unit direction.
    fn boundary_along(&self, h: &Sym2) -> f64 {
        let base: Vec<f64> = self.decomposition.base.iter().map(|b| qf(*b)).collect();
        let slope = self.decomposition.slope(h);
        base.iter()
            .zip(&slope)
            .filter(|(_, s)| **s < 0.0)
            .map(|(b, s)| b / -s)
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest radius, up to a safety factor, such that every `γ_(k)²` stays
    /// positive on the Frobenius ball around `Id`. The worst direction is
    /// found on a dense spherical sample of the symmetric space and refined
    /// by a line search.
    pub fn certify_ball(&self) -> f64 {
        let mut worst = f64::INFINITY;
        let mut worst_dir = [1.0, 0.0, 0.0];
        for h in sphere_sample(20_000) {
            let t = self.boundary_along(&h);
            if t < worst {
                worst = t;
                worst_dir = h;
            }
        }
        // Bisection along the worst direction confirms the sign change of the
        // smallest coefficient.
        let min_g2 = |t: f64| {
            let r = [1.0 + t * worst_dir[0], t * worst_dir[1], 1.0 + t * worst_dir[2]];
            self.decomposition.eval(&r).into_iter().fold(f64::INFINITY, f64::min)
        };
        let (mut lo, mut hi) = (0.0, 2.0 * worst);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if min_g2(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        BALL_SAFETY * lo
    }

    /// Unit direction in which the ball reaches the positivity boundary first.
    pub fn worst_direction(&self) -> Sym2 {
        sphere_sample(20_000)
            .into_iter()
            .map(|h| (self.boundary_along(&h), h))
            .fold((f64::INFINITY, [1.0, 0.0, 0.0]), |acc, x| if x.0 < acc.0 { x } else { acc })
            .1
    }

    /// Estimate of `Σ_k ‖γ_(k)‖_{C⁴}` on the certified ball from the closed-form
    /// directional derivatives of `√(affine)`, sampled over the ball.
    pub fn estimate_m_star(&self, samples: usize) -> f64 {
        // d^m/dt^m s(t)^{1/2} = c_m s^{1/2-m} s'^m for affine s.
        const C: [f64; 5] = [1.0, 0.5, -0.25, 0.375, -0.9375];
        let dirs = sphere_sample(samples);
        let mut total = 0.0;
        for (b, l) in self.decomposition.base.iter().zip(&self.decomposition.linear) {
            let lf = [qf(l[0]), qf(l[1]), qf(l[2])];
            let mut sup = [0.0f64; 5];
            for h in &dirs {
                let slope = lf[0] * h[0] + lf[1] * h[1] + lf[2] * h[2];
                for frac in [0.0, 0.25, 0.5, 0.75, 1.0] {
                    let s = qf(*b) + slope * frac * self.c_r;
                    for m in 0..5 {
                        let v = (C[m] * s.powf(0.5 - m as f64) * slope.powi(m as i32)).abs();
                        sup[m] = sup[m].max(v);
                    }
                }
            }
            total += sup.iter().sum::<f64>();
        }
        total
    }

    /// Directions and base coefficients as CSV.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("index,k_x,k_y,k1_x,k1_y,base_coefficient\n");
        for (i, (d, b)) in self.directions.iter().zip(&self.decomposition.base).enumerate() {
            s.push_str(&format!("{i},{},{},{},{},{}\n", d.k[0], d.k[1], d.k1[0], d.k1[1], b));
        }
        s
    }
}

/// Least positive integer clearing every denominator of `k` and `k₁`.
pub fn integrality_constant(dirs: &[Direction]) -> i64 {
    dirs.iter()
        .flat_map(|d| d.k.iter().chain(d.k1.iter()).map(|c| *c.denom()))
        .fold(1i64, |acc, den| acc.lcm(&den))
}

/// Affine coefficients for the four-direction set in the basis
/// `{D₁, D₂, D₃−D₄}`, with the base point chosen so `γ₃² = γ₄² = 1/4` at `Id`.
fn decompose_affine(dirs: &[Direction]) -> GammaDecomposition {
    assert_eq!(dirs.len(), 4, "the affine construction is specific to four directions");
    let d: Vec<Sym2Q> = dirs.iter().map(Direction::dyad).collect();
    let quarter = Q::new(1, 4);
    let diff = [d[2][0] - d[3][0], d[2][1] - d[3][1], d[2][2] - d[3][2]];
    // Id − ¼(D₃+D₄) = a D₁ + b D₂, solved on the (11) and (22) entries; the
    // off-diagonal entry vanishes identically by symmetry of D₃ and D₄.
    let rhs = [
        Q::one() - quarter * (d[2][0] + d[3][0]),
        Q::one() - quarter * (d[2][2] + d[3][2]),
    ];
    let ab = solve_rational(
        vec![vec![d[0][0], d[1][0]], vec![d[0][2], d[1][2]]],
        rhs.to_vec(),
    )
    .expect("dyads D1, D2 are independent on the diagonal");
    let base = vec![ab[0], ab[1], quarter, quarter];

    // Offset coordinates: (d11, d12, d22) = x D₁ + y D₂ + z (D₃ − D₄).
    let m = vec![
        vec![d[0][0], d[1][0], diff[0]],
        vec![d[0][1], d[1][1], diff[1]],
        vec![d[0][2], d[1][2], diff[2]],
    ];
    // The inverse's columns give the linear forms of (x, y, z).
    let mut inv = vec![[Q::zero(); 3]; 3];
    for (col, e) in [[1, 0, 0], [0, 1, 0], [0, 0, 1]].iter().enumerate() {
        let rhs: Vec<Q> = e.iter().map(|&v| Q::from_integer(v)).collect();
        let sol = solve_rational(m.clone(), rhs).expect("basis {D1, D2, D3-D4} spans");
        for row in 0..3 {
            inv[row][col] = sol[row];
        }
    }
    let neg = |v: Sym2Q| [-v[0], -v[1], -v[2]];
    let linear = vec![inv[0], inv[1], inv[2], neg(inv[2])];
    GammaDecomposition { base, linear }
}

/// Frobenius-unit symmetric matrices on a Fibonacci sphere in the
/// orthonormal coordinates `(m11, √2·m12, m22)`, plus the coordinate axes.
pub fn sphere_sample(n: usize) -> Vec<Sym2> {
    let mut out = Vec::with_capacity(n + 6);
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    for i in 0..n {
        let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
        let rad = (1.0 - z * z).sqrt();
        let th = golden * i as f64;
        let (a, b, c) = (rad * th.cos(), rad * th.sin(), z);
        out.push([a, b / 2f64.sqrt(), c]);
    }
    for s in [1.0, -1.0] {
        out.push([s, 0.0, 0.0]);
        out.push([0.0, s / 2f64.sqrt(), 0.0]);
        out.push([0.0, 0.0, s]);
    }
    out
}
