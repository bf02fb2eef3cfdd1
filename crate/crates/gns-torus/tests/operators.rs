use std::f64::consts::PI;

use gns_torus::{ops, random, Field, Grid, Rank};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn grid(n: usize) -> Grid {
    Grid::new(n).unwrap()
}

fn rel(a: &Field, b: &Field) -> f64 {
    a.max_abs_diff(b).unwrap() / b.sup().max(1e-300)
}

#[test]
fn grid_rejects_bad_sizes() {
    assert!(Grid::new(4).is_err());
    assert!(Grid::new(48).is_err());
    assert!(Grid::new(8).is_ok());
}

#[test]
fn derivative_of_single_sine() {
    let g = grid(64);
    let f = Field::scalar_fn(&g, |x, _| (2.0 * PI * x).sin());
    let d = ops::partial(&f, 0);
    let exact = Field::scalar_fn(&g, |x, _| 2.0 * PI * (2.0 * PI * x).cos());
    assert!(d.max_abs_diff(&exact).unwrap() <= 1e-12);
}

#[test]
fn gradient_amplitude_of_mode_3_4() {
    let g = grid(32);
    let f = Field::scalar_fn(&g, |x, y| (2.0 * PI * (3.0 * x + 4.0 * y)).cos());
    let grad = ops::gradient(&f).unwrap();
    let amp = grad.sup();
    assert!((amp - 2.0 * PI * 5.0).abs() <= 1e-10 * amp, "{amp}");
}

#[test]
fn perp_gradient_is_divergence_free() {
    let g = grid(64);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let psi = random::band_limited(&g, Rank::Scalar, 12, &mut rng);
    let v = ops::perp_gradient(&psi).unwrap();
    assert!(ops::divergence(&v).unwrap().sup() <= 1e-12 * v.sup() * 64.0);
}

#[test]
fn tensor_divergence_rows() {
    let g = grid(32);
    // R₁₁ = sin 2πx₂, R₁₂ = 0: div R = (0, −∂₂R₁₁).
    let r = Field::from_fn(&g, Rank::SymTraceless, |_, y| [(2.0 * PI * y).sin(), 0.0]);
    let d = ops::divergence(&r).unwrap();
    let exact = Field::from_fn(&g, Rank::Vector, |_, y| [0.0, -2.0 * PI * (2.0 * PI * y).cos()]);
    assert!(d.max_abs_diff(&exact).unwrap() <= 1e-12);
}

#[test]
fn inverse_divergence_on_random_fields() {
    let g = grid(64);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10 {
        let v = random::band_limited(&g, Rank::Vector, 20, &mut rng);
        let r = ops::inverse_divergence(&v).unwrap();
        assert_eq!(r.rank(), Rank::SymTraceless);
        assert!(rel(&ops::divergence(&r).unwrap(), &v) <= 1e-10);
    }
    assert_eq!(ops::inverse_divergence(&Field::zeros(&g, Rank::Vector)).unwrap().sup(), 0.0);
}

#[test]
fn inverse_divergence_rejects_mean() {
    let g = grid(16);
    let v = Field::from_fn(&g, Rank::Vector, |x, _| [1.0 + (2.0 * PI * x).sin(), 0.0]);
    assert!(ops::inverse_divergence(&v).is_err());
}

#[test]
fn leray_projection_cases() {
    let g = grid(64);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let f = random::band_limited(&g, Rank::Scalar, 15, &mut rng);
    let grad = ops::gradient(&f).unwrap();
    assert!(ops::leray_project(&grad).unwrap().sup() <= 1e-12 * grad.sup());

    let shear = Field::from_fn(&g, Rank::Vector, |_, y| [(2.0 * PI * y).sin(), 0.0]);
    assert!(rel(&ops::leray_project(&shear).unwrap(), &shear) <= 1e-12);

    let v = random::band_limited(&g, Rank::Vector, 15, &mut rng);
    let p = ops::leray_project(&v).unwrap();
    assert!(ops::divergence(&p).unwrap().sup() <= 1e-12 * v.sup() * 64.0);
    let pp = ops::leray_project(&p).unwrap();
    assert!(rel(&pp, &p) <= 1e-12);
    // Orthogonal to gradients.
    let pairing = p.dot(&grad).unwrap().mean()[0];
    assert!(pairing.abs() <= 1e-12 * p.sup() * grad.sup());
}

#[test]
fn fractional_laplacian_cases() {
    let g = grid(32);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let f = random::band_limited(&g, Rank::Scalar, 10, &mut rng);
    let a = ops::fractional_laplacian(&f, 1.0).unwrap();
    let b = ops::laplacian(&f).scale(-1.0);
    assert!(rel(&a, &b) <= 1e-12);
    assert!(rel(&ops::fractional_laplacian(&f, 0.0).unwrap(), &f) <= 1e-12);
    assert!(ops::fractional_laplacian(&f, -0.5).is_err());

    let mode = Field::scalar_fn(&g, |x, y| (2.0 * PI * (3.0 * x + 4.0 * y)).cos());
    for alpha in [0.5, 1.25, 1.5] {
        let out = ops::fractional_laplacian(&mode, alpha).unwrap();
        let expect = mode.scale((2.0 * PI * 5.0).powf(2.0 * alpha));
        assert!(rel(&out, &expect) <= 1e-12, "alpha {alpha}");
    }
}

#[test]
fn projections_band_logic() {
    let g = grid(32);
    let c = Field::scalar_fn(&g, |_, _| 2.5);
    assert!(ops::project_nonzero(&c).sup() <= 1e-15);
    let mode = Field::scalar_fn(&g, |x, y| (2.0 * PI * (3.0 * x + 4.0 * y)).sin());
    assert!(rel(&ops::project_high(&mode, 4.0), &mode) <= 1e-13);
    assert!(ops::project_high(&mode, 6.0).sup() <= 1e-13);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let f = random::band_limited(&g, Rank::Scalar, 10, &mut rng).map(|v| v + 1.0);
    let once = ops::project_nonzero(&f);
    assert!(rel(&ops::project_nonzero(&once), &once) <= 1e-14);
}

#[test]
fn spectral_round_trip_and_hermitian() {
    let g = grid(64);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let f = random::band_limited(&g, Rank::Vector, 25, &mut rng);
    let s = f.spectrum();
    assert!(s.hermitian_defect() <= 1e-14);
    assert!(rel(&s.to_field(), &f) <= 1e-12);
}

#[test]
fn random_fields_are_seed_determined() {
    let g = grid(32);
    let a = random::band_limited(&g, Rank::Vector, 8, &mut ChaCha8Rng::seed_from_u64(42));
    let b = random::band_limited(&g, Rank::Vector, 8, &mut ChaCha8Rng::seed_from_u64(42));
    assert_eq!(a, b);
    let v = random::divergence_free(&g, 8, &mut ChaCha8Rng::seed_from_u64(42)).unwrap();
    assert!((v.sup() - 1.0).abs() < 1e-14);
}

#[test]
fn pressure_operator_inverts_div_div() {
    // ΔP = ∂ᵢ∂ⱼRᵢⱼ checked against Leray: ℙ_H div R = div R − ∇P.
    let g = grid(64);
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let r = random::band_limited(&g, Rank::SymTraceless, 12, &mut rng);
    let p = ops::inverse_laplacian(&ops::div_div(&r).unwrap());
    let divr = ops::divergence(&r).unwrap();
    let lhs = ops::leray_project(&divr).unwrap();
    let rhs = divr.sub(&ops::gradient(&p).unwrap()).unwrap();
    assert!(rel(&lhs, &rhs) <= 1e-11);
}

#[test]
fn div_outer_matches_product_rule() {
    let g = grid(64);
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let u = random::divergence_free(&g, 6, &mut rng).unwrap();
    // For divergence-free u, div(u⊗u) = (u·∇)u.
    let a = ops::div_outer(&u, &u).unwrap();
    let d1 = ops::partial(&u, 0).mul_scalar(&u.component_field(0)).unwrap();
    let d2 = ops::partial(&u, 1).mul_scalar(&u.component_field(1)).unwrap();
    let b = d1.add(&d2).unwrap();
    assert!(rel(&a, &b) <= 1e-11);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn operators_commute_with_mean_projection(seed in any::<u64>(), alpha in 0.0f64..1.5) {
        let g = grid(32);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random::band_limited(&g, Rank::Vector, 10, &mut rng).map(|v| v + 0.3);
        let p = ops::project_nonzero(&f);
        let a = ops::project_nonzero(&ops::leray_project(&f).unwrap());
        let b = ops::leray_project(&p).unwrap();
        prop_assert!(a.max_abs_diff(&b).unwrap() <= 1e-12 * f.sup());
        let a = ops::project_nonzero(&ops::fractional_laplacian(&f, alpha).unwrap());
        let b = ops::fractional_laplacian(&p, alpha).unwrap();
        prop_assert!(a.max_abs_diff(&b).unwrap() <= 1e-12 * b.sup().max(1.0));
        let a = ops::project_nonzero(&ops::partial(&f, 1));
        let b = ops::partial(&p, 1);
        prop_assert!(a.max_abs_diff(&b).unwrap() <= 1e-12 * b.sup());
    }

    #[test]
    fn sym_outer_is_traceless_part(seed in any::<u64>()) {
        let g = grid(16);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random::band_limited(&g, Rank::Vector, 4, &mut rng);
        let v = random::band_limited(&g, Rank::Vector, 4, &mut rng);
        let r = u.sym_outer(&v).unwrap();
        for i in 0..g.len() {
            let (u1, u2, v1, v2) = (u.comp(0)[i], u.comp(1)[i], v.comp(0)[i], v.comp(1)[i]);
            let tr = u1 * v1 + u2 * v2;
            let tol = 1e-14 * (u1.hypot(u2) * v1.hypot(v2)).max(1.0);
            prop_assert!((r.comp(0)[i] - (u1 * v1 - 0.5 * tr)).abs() <= tol);
            prop_assert!((r.comp(1)[i] - 0.5 * (u1 * v2 + u2 * v1)).abs() <= tol);
        }
    }
}
