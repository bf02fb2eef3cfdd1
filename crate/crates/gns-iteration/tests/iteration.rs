use std::f64::consts::TAU;
use std::sync::Arc;

use gns_geometry::WavevectorSet;
use gns_iteration::report::{check_times, MeasureOptions};
use gns_iteration::*;
use gns_params::{derive_scales, DeskScales, FunctionSpaceSpec, IterationParams, Lebesgue, Regime, ScaleSet, Q};
use gns_torus::ops::{divergence, gradient, inverse_divergence_leray, leray_project};
use gns_torus::random::{band_limited, divergence_free};
use gns_torus::{Field, Grid, Rank};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn scales(lambda: u64) -> ScaleSet {
    let space = FunctionSpaceSpec::new(Q::from_integer(1), Lebesgue::Finite(Q::from_integer(2)), Lebesgue::Finite(Q::from_integer(2))).unwrap();
    let params = IterationParams { a: 2, b: 20020, beta: 1e-12, epsilon: Q::new(1, 20) };
    let desk = DeskScales { lambda, ell: 1.0 / 32.0, delta_q1: 1.0, delta_q2: 1.0 };
    derive_scales(&params, &space, 0, Regime::Desk(desk)).unwrap()
}

fn shape(n: usize, seed: u64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    divergence_free(&Grid::new(n).unwrap(), 2, &mut rng).unwrap()
}

fn bump_level(n: usize, seed: u64) -> InitialState {
    initial_step(&shape(n, seed), TimeProfile::Bump { start: 0.0, end: 0.5 }, 1.0).unwrap()
}

fn rel(a: &Field, b: &Field) -> f64 {
    a.max_abs_diff(b).unwrap() / a.sup().max(b.sup())
}

#[test]
fn zero_velocity_has_zero_stress_and_pressure() {
    let grid = Grid::new(32).unwrap();
    let init = initial_step(&Field::zeros(&grid, Rank::Vector), TimeProfile::Steady, 1.0).unwrap();
    for t in [0.1, 0.7] {
        assert_eq!(init.stress(t).unwrap().sup(), 0.0);
        assert_eq!(init.pressure(t).unwrap().sup(), 0.0);
    }
}

#[test]
fn steady_shear_matches_closed_form() {
    let grid = Grid::new(64).unwrap();
    let alpha = 0.75;
    let u = Field::from_fn(&grid, Rank::Vector, |x, _| [0.0, (TAU * x).sin()]);
    let init = initial_step(&u, TimeProfile::Steady, alpha).unwrap();
    let c = TAU.powf(2.0 * alpha - 1.0);
    let r = Field::from_fn(&grid, Rank::SymTraceless, |x, _| {
        let s = (TAU * x).sin();
        [-0.5 * s * s, -c * (TAU * x).cos()]
    });
    let p = Field::scalar_fn(&grid, |x, _| 0.25 * (2.0 * TAU * x).cos());
    assert!(rel(&init.stress(0.3).unwrap(), &r) < 1e-12);
    assert!(rel(&init.pressure(0.3).unwrap(), &p) < 1e-12);
    assert!(nsr_residual(&init, 0.4).unwrap().full < 1e-12);
}

#[test]
fn initial_level_solves_the_relaxed_system() {
    let init = bump_level(64, 3);
    for t in [0.1, 0.25, 0.4] {
        let r = nsr_residual(&init, t).unwrap();
        assert!(r.full < 1e-8 && r.leray < 1e-8, "{r:?}");
    }
    let (a, b) = init.time_support();
    assert_eq!((a, b), (0.0, 0.5));
    assert_eq!(init.velocity(0.6).unwrap().sup(), 0.0);
    assert_eq!(init.stress(-0.1).unwrap().sup(), 0.0);
}

#[test]
fn initial_level_rejects_bad_shapes() {
    let grid = Grid::new(32).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let phi = band_limited(&grid, Rank::Scalar, 3, &mut rng);
    let grad = gradient(&phi).unwrap();
    assert!(matches!(initial_step(&grad, TimeProfile::Steady, 1.0), Err(IterationError::NotDivergenceFree { .. })));
    let shifted = Field::from_fn(&grid, Rank::Vector, |_, y| [1.0 + (TAU * y).sin(), 0.0]);
    assert!(matches!(initial_step(&shifted, TimeProfile::Steady, 1.0), Err(IterationError::NotMeanFree { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn chi_keeps_the_stress_ratio_bounded(z in 0.0f64..50.0) {
        let c = chi(z);
        prop_assert!(c >= 1.0);
        prop_assert!(z / c <= 2.0);
        prop_assert!(c <= z.max(1.0) + 1e-15);
        if z <= 1.0 {
            prop_assert_eq!(c, 1.0);
        }
        if z >= 2.0 {
            prop_assert!((c - z).abs() <= 1e-15 * z);
        }
    }

    #[test]
    fn amplitudes_reconstruct_the_stress(seed in 0u64..1000, size in 0.05f64..20.0, f in 0.0f64..=1.0) {
        let grid = Grid::new(16).unwrap();
        let set = WavevectorSet::build();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = band_limited(&grid, Rank::SymTraceless, 3, &mut rng);
        let r = r.scale(size / r.sup());
        let amps = build_amplitudes(&r, 0.0, f, 1.0, &set).unwrap();
        let inv = amps.invariants(&r, &set);
        prop_assert!(inv.floor >= 2.0 - 1e-12);
        prop_assert!(inv.ratio <= 1.0);
        if f > 0.0 {
            prop_assert!(inv.reconstruction <= 1e-10, "{}", inv.reconstruction);
        }
    }
}

#[test]
fn zero_stress_gives_constant_amplitudes() {
    let grid = Grid::new(16).unwrap();
    let set = WavevectorSet::build();
    let (delta, f) = (3.0, 0.8);
    let amps = build_amplitudes(&Field::zeros(&grid, Rank::SymTraceless), 0.0, f, delta, &set).unwrap();
    let rho = 2.0 * delta / set.c_r;
    let gammas = set.gammas(&[1.0, 0.0, 1.0]).unwrap();
    for (a, g) in amps.a.iter().zip(gammas) {
        let want = rho.sqrt() * f * g;
        assert!(a.comp(0).iter().all(|v| (v - want).abs() <= 1e-14 * want));
    }
}

#[test]
fn cutoff_is_one_on_the_support_and_smooth() {
    let c = TimeCutoff { start: 0.2, end: 0.6, ramp: 0.05 };
    assert_eq!(c.value(0.2), 1.0);
    assert_eq!(c.value(0.6), 1.0);
    assert_eq!(c.value(0.1), 0.0);
    let (lo, hi) = c.support();
    assert!((lo - 0.15).abs() < 1e-15 && (hi - 0.65).abs() < 1e-15);
    for t in [0.17, 0.18, 0.62, 0.64] {
        let fd = (c.value(t + 1e-6) - c.value(t - 1e-6)) / 2e-6;
        assert!((fd - c.derivative(t)).abs() < 1e-5 * c.derivative(t).abs().max(1.0));
    }
}

#[test]
fn mollified_level_solves_the_relaxed_system() {
    let m = mollify_state(Arc::new(bump_level(64, 5)), 1.0 / 16.0, 8).unwrap();
    for t in [0.15, 0.3] {
        let r = nsr_residual(&m, t).unwrap();
        assert!(r.full < 1e-7 && r.leray < 1e-7, "{r:?}");
    }
    let (a, b) = m.time_support();
    assert!((a + 1.0 / 16.0).abs() < 1e-15 && (b - 0.5 - 1.0 / 16.0).abs() < 1e-15);
}

#[test]
fn commutator_scales_with_the_mollifier() {
    let base: Arc<dyn Relaxed> = Arc::new(bump_level(128, 5));
    let times = [0.2, 0.3];
    let coarse = mollify_state(base.clone(), 1.0 / 16.0, 8).unwrap();
    let fine = mollify_state(base.clone(), 1.0 / 32.0, 8).unwrap();
    let tiny = mollify_state(base, 1.0 / 128.0, 8).unwrap();
    let (c0, c1) = (coarse.commutator_constant(&times).unwrap(), fine.commutator_constant(&times).unwrap());
    assert!(c0 > 0.0 && c1 <= 1.1 * c0, "{c0} {c1}");
    let com = tiny.r_com(0.25).unwrap().sup();
    let r = tiny.r_ell(0.25).unwrap().sup();
    assert!(com < 1e-2 * r, "{com} {r}");
}

#[test]
fn time_mollification_contracts_l1() {
    let m = mollify_state(Arc::new(bump_level(32, 9)), 1.0 / 16.0, 6).unwrap();
    let (moll, orig) = m.l1_contraction().unwrap();
    assert!(moll <= orig * (1.0 + 1e-12), "{moll} {orig}");
}

#[test]
fn mollifier_rejects_bad_scales() {
    let base: Arc<dyn Relaxed> = Arc::new(bump_level(32, 9));
    for ell in [0.0, 0.3, 1.0 / 64.0] {
        assert!(matches!(mollify_state(base.clone(), ell, 8), Err(IterationError::Resolution(_))));
    }
    assert!(mollify_state(base, 1.0 / 16.0, 1).is_err());
}

#[test]
fn assembly_needs_a_resolving_band() {
    let base: Arc<dyn Relaxed> = Arc::new(bump_level(32, 2));
    let cfg = StepConfig { band: Some(3), ..StepConfig::default() };
    assert!(matches!(assemble_next(base, &scales(8), &cfg), Err(IterationError::Resolution(_))));
}

#[test]
fn constant_amplitudes_leave_only_the_jet_corrector() {
    let level = assemble_next(Arc::new(bump_level(64, 4)), &scales(8), &StepConfig::default()).unwrap();
    let (a0, b0) = level.temporal.support_intervals(1)[0];
    let t = a0 + 0.3 * (b0 - a0);
    let mut amps = level.amplitudes(t).unwrap();
    let grid = level.grid().clone();
    amps.a = (0..level.set.len()).map(|k| Field::scalar(&grid, vec![1.5 + k as f64; grid.len()]).unwrap()).collect();
    let p = build_perturbations(&amps, &level.jets, &level.temporal).unwrap();
    let mut want = Field::zeros(&grid, Rank::Vector);
    for (k, jet) in level.jets.iter().enumerate() {
        want = want.axpy((1.5 + k as f64) * level.temporal.g(k, t), &jet.wc(t)).unwrap();
    }
    assert!(want.sup() > 0.0);
    assert!(rel(&p.w_c, &want) < 1e-10);
    // Constant amplitudes have no gradient, so the oscillation corrector vanishes.
    assert!(p.w_o.sup() < 1e-10 * p.w_p.sup());
}

#[test]
fn zero_perturbation_keeps_the_mollified_stress() {
    let cfg = StepConfig { perturbation_scale: 0.0, ..StepConfig::default() };
    let level = assemble_next(Arc::new(bump_level(64, 4)), &scales(8), &cfg).unwrap();
    for t in [0.1, 0.3] {
        let s = level.state(t).unwrap();
        assert_eq!(s.perturbation.total().unwrap().sup(), 0.0);
        // The new stress is the part of R̊*_ℓ that the divergence sees.
        let r = s.decomposition.r_next().unwrap();
        let want = inverse_divergence_leray(&divergence(&s.r_star).unwrap()).unwrap();
        assert!(rel(&r, &want) < 1e-12);
        let lost = leray_project(&divergence(&r.sub(&s.r_star).unwrap()).unwrap()).unwrap();
        assert!(lost.sup() < 1e-10 * divergence(&s.r_star).unwrap().sup());
        for (name, f) in s.decomposition.components() {
            if name != "r_rem" && name != "r_com" {
                assert!(f.sup() < 1e-12 * s.r_star.sup(), "{name}");
            }
        }
    }
}

#[test]
fn amplitude_rates_match_differences() {
    let level = assemble_next(Arc::new(bump_level(64, 4)), &scales(8), &StepConfig::default()).unwrap();
    for t in [0.05, 0.3, level.cutoff.end + 0.5 * level.cutoff.ramp] {
        let exact = level.amplitudes_dt(t).unwrap();
        let fd = level.amplitudes_dt_fd(t).unwrap();
        for (a, b) in exact.iter().zip(&fd) {
            assert!(rel(a, b) < 1e-7, "{t} {}", rel(a, b));
        }
    }
}

#[test]
fn corrector_identities_hold_in_and_out_of_windows() {
    let level = assemble_next(Arc::new(bump_level(64, 4)), &scales(8), &StepConfig::default()).unwrap();
    for t in check_times(&level) {
        let (tr, osc) = level.corrector_identities(t).unwrap();
        assert!(tr < 1e-8 && osc < 1e-7, "{t} {tr} {osc}");
    }
}

#[test]
fn small_step_passes_every_check() {
    let level = assemble_next(Arc::new(bump_level(64, 11)), &scales(8), &StepConfig::default()).unwrap();
    let opts = MeasureOptions { gamma: 2.0, p: 2.0, varrho: 1.04, checks: true, support_samples: 32 };
    let rep = measure_step(&level, &opts).unwrap();
    for r in rep.rows.iter().filter(|r| r.pass.is_some()) {
        assert_eq!(r.pass, Some(true), "{} = {:e}", r.name, r.value);
    }
    assert!(rep.passed());
    let csv = rep.to_csv();
    assert!(csv.starts_with("name,value,tolerance,pass\n"));
    assert_eq!(csv, measure_step(&level, &opts).unwrap().to_csv());
}
