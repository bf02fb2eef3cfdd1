use std::f64::consts::PI;

use gns_blocks::identities::check_jet_identities;
use gns_blocks::sweep::{loglog_slope, SweepTarget};
use gns_blocks::*;
use gns_geometry::WavevectorSet;
use gns_params::{derive_scales, DeskScales, FunctionSpaceSpec, IterationParams, Lebesgue, Regime, ScaleSet, Q};
use gns_torus::ops::perp_gradient;
use gns_torus::random::band_limited;
use gns_torus::{Grid, Rank};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn scales(lambda: u64) -> ScaleSet {
    let space = FunctionSpaceSpec::new(Q::from_integer(1), Lebesgue::Finite(Q::from_integer(2)), Lebesgue::Finite(Q::from_integer(2))).unwrap();
    let params = IterationParams { a: 2, b: 20020, beta: 1e-12, epsilon: Q::new(1, 20) };
    let desk = DeskScales { lambda, ell: 1.0 / 32.0, delta_q1: 1.0, delta_q2: 1.0 };
    derive_scales(&params, &space, 0, Regime::Desk(desk)).unwrap()
}

fn jet(lambda: u64, dir: usize) -> Jet {
    let set = WavevectorSet::build();
    let js = JetScales::realize(&scales(lambda), set.n_lambda).unwrap();
    Jet::new(set.directions[dir].clone(), js, &make_profiles()).unwrap()
}

/// Trapezoid rule on a uniform grid; spectrally accurate for functions
/// vanishing to all orders at the endpoints.
fn trapezoid(f: impl Fn(f64) -> f64, a: f64, b: f64, m: usize) -> f64 {
    let h = (b - a) / m as f64;
    (1..m).map(|i| f(a + i as f64 * h)).sum::<f64>() * h
}

#[test]
fn profiles_are_normalized_and_mean_free() {
    let p = make_profiles();
    for f in [|p: &Profile, x| p.phi(x, 0), |p: &Profile, x| p.psi(x, 0)] {
        let l2 = trapezoid(|x| f(&p, x).powi(2), -1.0, 1.0, 40_000) / (2.0 * PI);
        assert!((l2 - 1.0).abs() < 1e-10, "{l2}");
        assert!(trapezoid(|x| f(&p, x), -1.0, 1.0, 40_000).abs() < 1e-12);
        assert_eq!(f(&p, 1.001), 0.0);
        assert_eq!(f(&p, -1.001), 0.0);
    }
    let pp = trapezoid(|x| p.psi(x, 1).powi(2), -1.0, 1.0, 40_000);
    assert!((pp / p.psi_prime_sq() - 1.0).abs() < 1e-10);
}

#[test]
fn profile_derivatives_match_finite_differences() {
    let p = make_profiles();
    let h = 1e-5;
    for &x in &[-0.7, -0.31, 0.0, 0.12, 0.55, 0.8] {
        for d in 0..2 {
            let pairs = [(p.phi(x + h, d), p.phi(x - h, d), p.phi(x, d + 1)), (p.psi(x + h, d), p.psi(x - h, d), p.psi(x, d + 1))];
            for (plus, minus, exact) in pairs {
                let fd = (plus - minus) / (2.0 * h);
                assert!((fd - exact).abs() < 1e-5 * (1.0 + exact.abs()), "d={d} x={x}: {fd} vs {exact}");
            }
        }
    }
}

#[test]
fn rescaling_scales_lebesgue_norms() {
    let p = make_profiles();
    let r = 1.0 / 8.0;
    for kind in [ProfileKind::Phi, ProfileKind::Psi] {
        let base = rescale_profile(&p, kind, 0, 1.0).unwrap();
        let small = rescale_profile(&p, kind, 0, r).unwrap();
        for &q in &[1.0, 2.0, 4.0] {
            let reference = trapezoid(|x| base.eval(x).abs().powf(q), -1.0, 1.0, 40_000).powf(1.0 / q);
            let expect = r.powf(1.0 / q - 0.5) * reference;
            assert!((small.lp_norm(q) / expect - 1.0).abs() < 1e-9, "p={q}");
        }
        assert!(trapezoid(|x| small.eval(x), -r, r, 40_000).abs() < 1e-12);
        // r = 1 is the identity.
        assert_eq!(base.eval(0.3), if kind == ProfileKind::Phi { p.phi(0.3, 0) } else { p.psi(0.3, 0) });
    }
    assert!(rescale_profile(&p, ProfileKind::Phi, 0, 0.0).is_err());
    assert!(rescale_profile(&p, ProfileKind::Phi, 0, -0.5).is_err());
    assert!(rescale_profile(&p, ProfileKind::Phi, 0, 1.5).is_err());
}

#[test]
fn realized_scales_are_integral() {
    let set = WavevectorSet::build();
    for l in [16u64, 64, 256, 4096, 1 << 20] {
        let js = JetScales::realize(&scales(l), set.n_lambda).unwrap();
        assert_eq!(js.c, js.lambda_r_perp * 5);
        assert!((js.r_perp * l as f64 - js.lambda_r_perp as f64).abs() < 1e-9);
        let cycles = js.c as f64 * js.mu / js.sigma as f64;
        assert!((cycles - cycles.round()).abs() < 1e-6 * cycles);
        assert!(js.r_perp <= js.nominal_r_perp * (1.0 + 1e-12));
    }
}

#[test]
fn jet_is_mean_free_with_unit_energy() {
    let j = jet(64, 2);
    // The exact norm from phase-space quadrature.
    let l2 = j.norm(BlockKind::Jet, 0, 0, 2.0).unwrap();
    assert!((l2 - 1.0).abs() < 1e-10, "{l2}");
    // Sampled closed form on a grid that resolves the transverse profile.
    let g = Grid::new(2048).unwrap();
    let (w, _, psi) = j.sample(&g, 0.3).unwrap();
    let mean = w.mean();
    assert!(mean[0].abs() < 1e-10 && mean[1].abs() < 1e-10);
    let sampled = gns_torus::norms::l2(&w);
    assert!((sampled - 1.0).abs() < 0.02, "{sampled}");
    assert!(psi.mean()[0].abs() < 1e-12);
}

#[test]
fn under_resolved_sampling_is_rejected() {
    let j = jet(64, 0);
    let err = j.sample(&Grid::new(128).unwrap(), 0.0).unwrap_err();
    assert!(matches!(err, BlockError::UnderResolved { n: 128, required: 256 }));
}

#[test]
fn jet_identities_hold() {
    let g = Grid::new(256).unwrap();
    let times = [0.0, 0.173, 0.61];
    for dir in 0..4 {
        let rep = check_jet_identities(&jet(32, dir), &g, &times).unwrap();
        assert!(rep.oscillation < 1e-9, "{rep:?}");
        assert!(rep.transport < 1e-10, "{rep:?}");
        assert!(rep.curl_grid < 1e-10, "{rep:?}");
        assert!(rep.curl_pointwise < 1e-9, "{rep:?}");
        assert!(rep.leibniz < 1e-9, "{rep:?}");
        assert!(rep.time_period < 1e-10, "{rep:?}");
        assert!(rep.space_period < 1e-10, "{rep:?}");
    }
}

#[test]
fn grid_jet_has_exact_mean_outer_product() {
    let j = jet(32, 2);
    let g = Grid::new(128).unwrap();
    let gj = GridJet::new(&j, &g, 31).unwrap();
    let k1 = j.k1;
    let m = gj.mean_outer();
    let expect = [k1[0] * k1[0], k1[0] * k1[1], k1[1] * k1[1]];
    for i in 0..3 {
        assert!((m[i] - expect[i]).abs() < 1e-12, "{m:?}");
    }
    assert!(gj.retained_energy() > 0.0 && gj.retained_energy() <= 1.0 + 1e-12);
    assert!(matches!(GridJet::new(&j, &g, 64), Err(BlockError::Band { .. })));
    assert!(matches!(GridJet::new(&j, &g, 0), Err(BlockError::Band { .. })));
}

#[test]
fn temporal_pattern_invariants() {
    for (tau, sigma) in [(1.0, 1), (12.5, 2), (47.0, 3)] {
        let pat = TemporalPattern::standard(tau, sigma, 4).unwrap();
        for k in 0..4 {
            // Independent quadrature over each support interval.
            let total: f64 = pat.support_intervals(k).iter().map(|&(a, b)| trapezoid(|t| pat.g(k, t).powi(2), a, b, 20_000)).sum();
            assert!((total - 1.0).abs() < 1e-10, "tau={tau} k={k}: {total}");
            assert!(pat.h_sup(k) <= 1.0);
            let times: Vec<f64> = (0..97).map(|i| 0.003 + i as f64 / 97.0).collect();
            let res = pat.h_identity_residual(k, &times);
            assert!(res < 1e-9, "tau={tau} k={k}: {res}");
            // Mean zero over each support.
            let mean: f64 = pat.support_intervals(k).iter().map(|&(a, b)| trapezoid(|t| pat.g(k, t), a, b, 20_000)).sum();
            assert!(mean.abs() < 1e-10);
        }
        let grid: Vec<f64> = (0..50_000).map(|i| i as f64 / 50_000.0).collect();
        assert!(pat.supports_disjoint(&grid));
    }
}

#[test]
fn h_is_continuous_and_periodic() {
    let pat = TemporalPattern::standard(20.0, 3, 4).unwrap();
    for k in 0..4 {
        for j in 0..=3 {
            let t = j as f64 / 3.0;
            assert!((pat.h(k, t - 1e-12) - pat.h(k, t + 1e-12)).abs() < 1e-9);
        }
    }
}

#[test]
fn overlapping_shifts_are_reported() {
    let err = make_temporal(10.0, 1, vec![0.0, 0.05, 0.5], 0.1).unwrap_err();
    match err {
        BlockError::Overlap(s) => assert!(s.contains("(0, 1)") && !s.contains("(0, 2)"), "{s}"),
        e => panic!("{e}"),
    }
    assert!(make_temporal(10.0, 1, vec![0.95], 0.1).is_err());
}

fn sweep(target: SweepTarget, lambdas: &[u64]) -> gns_blocks::SweepResult {
    let set = WavevectorSet::build();
    let sc: Vec<ScaleSet> = lambdas.iter().map(|&l| scales(l)).collect();
    scaling_sweep(target, &sc, &set.directions[2], set.n_lambda, &make_profiles()).unwrap()
}

const LAMBDAS: [u64; 5] = [16, 32, 64, 128, 256];

#[test]
fn unit_energy_sweep_is_flat() {
    let r = sweep(SweepTarget::Block { kind: BlockKind::Jet, p: 2.0, n: 0, m: 0 }, &LAMBDAS);
    assert!(r.fitted_slope.abs() <= 0.05, "{r:?}");
    assert_eq!(r.nominal_exponent, 0.0);
}

#[test]
fn l1_sweep_matches_realized_and_nominal_exponents() {
    let r = sweep(SweepTarget::Block { kind: BlockKind::Jet, p: 1.0, n: 0, m: 0 }, &LAMBDAS);
    assert!((r.nominal_exponent + 0.7).abs() < 1e-12);
    assert!(r.slope_error() <= 0.1, "{r:?}");
    assert!((r.fitted_slope - r.nominal_exponent).abs() <= 0.1, "{r:?}");
}

#[test]
fn derivative_sweeps_track_prediction() {
    for target in [
        SweepTarget::Block { kind: BlockKind::Jet, p: 2.0, n: 1, m: 0 },
        SweepTarget::Block { kind: BlockKind::Jet, p: 2.0, n: 0, m: 1 },
        SweepTarget::Block { kind: BlockKind::Corrector, p: 2.0, n: 0, m: 0 },
        SweepTarget::Block { kind: BlockKind::Potential, p: 4.0, n: 1, m: 0 },
        SweepTarget::CorrectorRatio { p: 2.0 },
    ] {
        let r = sweep(target, &LAMBDAS);
        assert!(r.slope_error() <= 0.1, "{target:?}: {r:?}");
    }
}

#[test]
fn temporal_l2_norm_is_constant() {
    let r = sweep(SweepTarget::Temporal { gamma: 2.0, m: 0 }, &LAMBDAS);
    let first = r.points[0].measured;
    assert!(r.points.iter().all(|p| (p.measured / first - 1.0).abs() < 0.02), "{r:?}");
    assert!(r.fitted_slope.abs() <= 0.05);
    let r = sweep(SweepTarget::Temporal { gamma: 1.0, m: 1 }, &LAMBDAS);
    assert!(r.slope_error() <= 0.05, "{r:?}");
}

#[test]
fn sweep_needs_four_points() {
    let set = WavevectorSet::build();
    let sc: Vec<ScaleSet> = [16, 32, 64].iter().map(|&l| scales(l)).collect();
    let r = scaling_sweep(SweepTarget::Temporal { gamma: 2.0, m: 0 }, &sc, &set.directions[0], set.n_lambda, &make_profiles());
    assert!(matches!(r, Err(BlockError::TooFewPoints { needed: 4, got: 3 })));
}

#[test]
fn sweep_csv_has_expected_columns() {
    let r = sweep(SweepTarget::Temporal { gamma: 2.0, m: 0 }, &[16, 32, 64, 128]);
    let csv = r.to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("lambda,measured_norm,predicted_exponent,fitted_slope"));
    assert_eq!(lines.count(), 4);
}

#[test]
fn loglog_slope_recovers_power_laws() {
    let xs = [2.0, 4.0, 8.0, 16.0];
    let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(-0.7)).collect();
    assert!((loglog_slope(&xs, &ys) + 0.7).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn leibniz_rule_for_random_amplitudes(seed in 0u64..1000, dir in 0usize..4) {
        let j = jet(16, dir);
        let g = Grid::new(64).unwrap();
        let gj = GridJet::new(&j, &g, 15).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = band_limited(&g, Rank::Scalar, 4, &mut rng);
        let c = j.scales.c as f64;
        let psi = gj.psi(0.2);
        let lhs = perp_gradient(&a.mul_scalar(&psi).unwrap()).unwrap().scale(1.0 / c);
        let sum = gj.w(0.2).add(&gj.wc(0.2)).unwrap();
        let rhs = sum.mul_scalar(&a).unwrap().add(&perp_gradient(&a).unwrap().mul_scalar(&psi).unwrap().scale(1.0 / c)).unwrap();
        let rel = lhs.max_abs_diff(&rhs).unwrap() / rhs.sup();
        prop_assert!(rel < 1e-9, "{}", rel);
    }

    #[test]
    fn temporal_normalization_for_random_scales(tau in 1.0f64..80.0, sigma in 1i64..5) {
        let pat = TemporalPattern::standard(tau, sigma, 4).unwrap();
        let n = pat.lgamma_norm(1, 0, 2.0);
        prop_assert!((n - 1.0).abs() < 1e-10, "{}", n);
        prop_assert!(pat.h_sup(1) <= 1.0);
    }
}
