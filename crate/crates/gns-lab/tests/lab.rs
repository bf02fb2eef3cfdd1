use std::f64::consts::TAU;
use std::process::Command;

use gns_lab::config::parse_list;
use gns_lab::lemmas::{run_decorrelation_check, run_stationary_phase_check, smooth_step, stationary_phase_lhs};
use gns_lab::*;
use gns_params::{Lebesgue, Q};
use gns_torus::{snapshot, Field, Grid};
use proptest::prelude::*;

const BASE: &str = "alpha=1\ngamma=2\np=2\nepsilon=1/20\nlambda=32\ngrid_n=256\ndesk_mode=true\n";

fn small_identities() -> LabConfig {
    let mut c = LabConfig::parse(&format!("{BASE}trials=4\nmatrices=50\n")).unwrap();
    c.grid_n = 64;
    c.lambdas = Some(vec![16]);
    c
}

#[test]
fn config_parses_required_and_optional_keys() {
    let text = "# campaign\nalpha = 5/4\ngamma=inf\np=3/2  # space\nepsilon=1/40\nlambda=8, 16,32,64\ngrid_n=128\ndesk_mode=false\n\nseed=99\ntol_slope_lemma=0.2\ndecorrelation_f=sine\n";
    let c = LabConfig::parse(text).unwrap();
    assert_eq!(c.alpha, Q::new(5, 4));
    assert_eq!(c.gamma, Lebesgue::Infinite);
    assert_eq!(c.p, Lebesgue::Finite(Q::new(3, 2)));
    assert_eq!(c.lambdas, Some(vec![8, 16, 32, 64]));
    assert!(!c.desk_mode);
    assert_eq!(c.seed, 99);
    assert_eq!(c.tol.slope_lemma, 0.2);
    assert_eq!(c.decorrelation_f, DecorrelationProfile::Sine);
    // b and β follow ε: the least even b above 1000/ε with bε integral.
    assert_eq!(c.b, 40040);
    assert!(c.beta < 1.0 / (100.0 * (c.b as f64).powi(2)));
}

#[test]
fn config_rejects_bad_files() {
    let missing = BASE.replace("grid_n=256\n", "");
    let err = LabConfig::parse(&missing).unwrap_err().to_string();
    assert!(err.contains("grid_n"), "{err}");
    let err = LabConfig::parse(&format!("{BASE}lamda=3\n")).unwrap_err().to_string();
    assert!(err.contains("unknown key"), "{err}");
    let err = LabConfig::parse(&format!("{BASE}alpha=1\n")).unwrap_err().to_string();
    assert!(err.contains("repeated"), "{err}");
    assert!(LabConfig::parse(&BASE.replace("alpha=1", "alpha=3/2")).is_err());
    assert!(LabConfig::parse(&BASE.replace("epsilon=1/20", "epsilon=0.05")).is_err());
    assert!(LabConfig::parse(&BASE.replace("desk_mode=true", "desk_mode=maybe")).is_err());
    assert!(LabConfig::parse("alpha").is_err());
    assert!(parse_list::<u64>("lambda", " , ").is_err());
}

#[test]
fn grid_sizes_round_up_to_powers_of_two() {
    assert_eq!(grid_for(256, 64), 256);
    assert_eq!(grid_for(64, 4 * 96), 512);
    assert_eq!(grid_for(1, 1), 8);
    assert_eq!(step::trend_grid(step::trend_band(16)), 256);
    assert_eq!(step::trend_grid(step::trend_band(4)), 64);
}

#[test]
fn regression_fits_power_laws() {
    let pts: Vec<(f64, f64)> = [2.0, 4.0, 8.0, 16.0].iter().map(|&x: &f64| (x, 3.0 * x.powf(-0.75))).collect();
    let r = RegressionResult::fit("law", pts.clone(), -0.75, 0.01);
    assert!(r.residual < 1e-12 && r.pass);
    let r = RegressionResult::fit("law", pts[..3].to_vec(), -0.75, 0.01);
    assert!(r.fitted_slope.is_nan() && !r.pass);
    let mut zero = pts.clone();
    zero[1].1 = 0.0;
    assert!(!RegressionResult::fit("law", zero, -0.75, 0.01).pass);
    let csv = RegressionResult::fit("law", pts, -0.5, 0.1).to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("x,value,predicted_slope,fitted_slope,residual,pass"));
    assert!(lines.all(|l| l.ends_with(",false")));
}

proptest! {
    #[test]
    fn regression_pass_is_the_tolerance_test(slope in -3.0f64..3.0, pred in -3.0f64..3.0, tol in 0.0f64..1.0, c in 0.1f64..10.0) {
        let pts = (0..5).map(|i| { let x = 2f64.powi(i); (x, c * x.powf(slope)) }).collect();
        let r = RegressionResult::fit("p", pts, pred, tol);
        prop_assert!((r.fitted_slope - slope).abs() < 1e-9);
        prop_assert_eq!(r.pass, (r.fitted_slope - pred).abs() <= tol);
        prop_assert!((r.residual - (slope - pred).abs()).abs() < 1e-9);
    }

    #[test]
    fn decorrelation_gap_is_bounded(p in 1.0f64..3.0, shift in 0.0f64..1.0) {
        let f = move |x: f64| 1.5 + 0.5 * (TAU * (x + shift)).cos();
        let g = |x: f64| (TAU * x).sin();
        let d = run_decorrelation_check(p, &[3, 5, 7, 9], &f, &g, 1.0).unwrap();
        // The gap never exceeds the C¹ bound with a unit constant.
        prop_assert!(d.bound_constant <= 1.0, "{}", d.bound_constant);
    }
}

#[test]
fn constant_factor_decorrelates_exactly() {
    let g = |x: f64| (TAU * x).sin();
    let d = run_decorrelation_check(1.0, &[4, 8, 16, 32], &|_| 1.0, &g, 0.15).unwrap();
    assert!(d.regression.points.iter().all(|&(_, gap)| gap <= 1e-14), "{:?}", d.regression.points);
    assert!(run_decorrelation_check(1.0, &[4, 8, 16, 32], &|_| 0.0, &g, 0.15).is_err());
}

#[test]
fn smooth_factor_has_no_l2_gap() {
    // f² has modes up to 2 and |g(σ·)|² only 0 and ±2σ, so for σ ≥ 2 the
    // squared norm factorizes exactly and the gap is rounding.
    let f = |x: f64| 1.0 + 0.5 * (TAU * x).sin();
    let g = |x: f64| (TAU * x).sin();
    let d = run_decorrelation_check(2.0, &[4, 8, 16, 32, 64], &f, &g, 0.15).unwrap();
    assert!(d.regression.points.iter().all(|&(_, gap)| gap <= 1e-13 * d.product), "{:?}", d.regression.points);
}

#[test]
fn steep_step_decorrelates_at_the_l1_rate() {
    let g = |x: f64| (TAU * x).sin();
    let d = run_decorrelation_check(1.0, &[4, 8, 16, 32, 64], &smooth_step, &g, 0.15).unwrap();
    assert!(d.regression.pass, "{:?}", d.regression);
    assert!((smooth_step(1.0 / 6.0) - 2.0).abs() < 1e-12 && (smooth_step(0.6) - 1.0).abs() < 1e-12);
}

#[test]
fn stationary_phase_with_constant_amplitude_is_exact() {
    let g = Grid::new(64).unwrap();
    let lambda = 12.0;
    let f = Field::scalar_fn(&g, |x, y| (TAU * (lambda * x)).cos() + (TAU * y).sin());
    let a = Field::scalar_fn(&g, |_, _| 3.0);
    // Only the mode at |ξ| = λ survives, and |∇|^{−1} divides it by 2πλ.
    let lhs = stationary_phase_lhs(&a, &f, lambda, 2.0).unwrap();
    assert!((lhs - 3.0 / (TAU * lambda) * 0.5f64.sqrt()).abs() < 1e-13, "{lhs}");
    let low = Field::scalar_fn(&g, |x, _| (TAU * x).cos());
    assert!(stationary_phase_lhs(&a, &low, lambda, 2.0).is_err());
}

#[test]
fn stationary_phase_rate_and_linearity() {
    let l = [8, 16, 32, 64];
    let r = run_stationary_phase_check(2.0, &l, &|_, y| 1.0 + 0.5 * (TAU * y).cos(), 0.15).unwrap();
    assert!(r.regression.residual < 0.01, "{:?}", r.regression);
    let one = run_stationary_phase_check(2.0, &l, &|_, y| 0.5 * (TAU * y).cos(), 0.15).unwrap();
    let two = run_stationary_phase_check(2.0, &l, &|_, y| (TAU * y).cos(), 0.15).unwrap();
    assert!((two.constant / one.constant - 2.0).abs() < 1e-12);
}

#[test]
fn identities_campaign_is_deterministic_and_records_the_seed() {
    let cfg = small_identities();
    let a = Campaign::Identities.run(&cfg).unwrap();
    assert!(a.passed, "{:#?}", a.summary);
    assert_eq!(a.manifest.get("seed"), Some("7"));
    assert_eq!(a.manifest.get("lambda16.grid_n"), Some("64"));
    let b = Campaign::Identities.run(&cfg).unwrap();
    assert_eq!(a.artifacts, b.artifacts);
    assert_eq!(a.manifest, b.manifest);
    let mut other = cfg.clone();
    other.seed = 8;
    assert_ne!(Campaign::Identities.run(&other).unwrap().artifacts[0], a.artifacts[0]);
}

#[test]
fn sweeps_need_four_frequencies() {
    let mut cfg = LabConfig::default();
    cfg.lambdas = Some(vec![8, 16, 32]);
    for c in [Campaign::Sweep, Campaign::Lemma65, Campaign::Step] {
        assert!(matches!(c.run(&cfg), Err(LabError::Config(_))), "{c:?}");
    }
    cfg.lambdas = Some(vec![8, 32, 16, 64]);
    assert!(matches!(Campaign::Sweep.run(&cfg), Err(LabError::Config(_))));
}

#[test]
fn paper_mode_only_reports_constraints() {
    let text = BASE.replace("desk_mode=true", "desk_mode=false").replace("gamma=2", "gamma=1").replace("p=2", "p=1");
    // At ε = 1/20 the stress exponent lands exactly on its strict bound.
    let edge = Campaign::Constraints.run(&LabConfig::parse(&text).unwrap()).unwrap();
    assert!(!edge.passed);
    let csv = edge.artifact("constraints.csv").unwrap().as_text().unwrap();
    assert!(csv.starts_with("constraint_name,lhs,rhs,pass\n"));
    assert_eq!(csv.lines().filter(|l| l.ends_with(",false")).count(), 1, "{csv}");
    assert!(csv.lines().any(|l| l.starts_with("stress_exponent_decay,") && l.ends_with(",false")));

    let cfg = LabConfig::parse(&text.replace("epsilon=1/20", "epsilon=1/40")).unwrap();
    let out = Campaign::Constraints.run(&cfg).unwrap();
    assert!(out.passed, "{:#?}", out.summary);
    assert!(matches!(Campaign::Identities.run(&cfg), Err(LabError::Config(_))));
    assert!(matches!(Campaign::Step.run(&cfg), Err(LabError::Config(_))));
}

#[test]
fn desk_constraints_enforce_only_exact_relations() {
    let out = Campaign::Constraints.run(&LabConfig::default()).unwrap();
    assert!(out.passed);
    assert!(out.manifest.get("unenforced_failures").is_some());
    assert_eq!(out.manifest.get("lambda"), Some("3.2e1"));
}

#[test]
fn small_step_writes_reports_and_snapshots() {
    let mut cfg = LabConfig::default();
    cfg.grid_n = 64;
    cfg.lambdas = Some(vec![8]);
    cfg.snapshots = 2;
    cfg.support_samples = 16;
    let out = Campaign::Step.run(&cfg).unwrap();
    assert!(out.passed, "{:#?}", out.summary);
    let dir = tempfile::tempdir().unwrap();
    out.write(dir.path()).unwrap();
    let (u, t) = snapshot::load(dir.path().join("snapshots/velocity_1.bin")).unwrap();
    assert_eq!(u.grid().n(), 64);
    assert!(t > 0.0 && t < 1.0);
    let manifest = std::fs::read_to_string(dir.path().join("manifest.txt")).unwrap();
    for key in ["seed=7", "r_perp=", "realized_sigma=", "tol.leray_residual=", "jet_band=8", "tol_slope_ratio="] {
        assert!(manifest.contains(key), "{key}");
    }
    let report = std::fs::read_to_string(dir.path().join("step_report.csv")).unwrap();
    assert!(report.starts_with("name,value,tolerance,pass\n"));
}

fn lab(args: &[&str], out: &std::path::Path) -> (i32, String) {
    let o = Command::new(env!("CARGO_BIN_EXE_gns-lab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("GNS_LAB_THREADS", "1")
        .output()
        .unwrap();
    (o.status.code().unwrap(), String::from_utf8_lossy(&o.stdout).into_owned() + &String::from_utf8_lossy(&o.stderr))
}

#[test]
fn command_line_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = lab(&["constraints", "--seed", "3"], dir.path());
    assert_eq!(code, 0, "{text}");
    let manifest = std::fs::read_to_string(dir.path().join("manifest.txt")).unwrap();
    assert!(manifest.starts_with("campaign=constraints\nseed=3\n"));

    let (code, text) = lab(&["sweep", "--lambda", "8,16,32"], dir.path());
    assert_eq!(code, 2, "{text}");
    assert!(text.contains("at least 4"), "{text}");

    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, format!("{BASE}colour=blue\n")).unwrap();
    let (code, _) = lab(&["identities", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(code, 2);

    // The p = 2 decorrelation of a smooth factor has no measurable rate.
    let cfg = dir.path().join("sine.cfg");
    std::fs::write(&cfg, format!("{BASE}lemma_p=2\ndecorrelation_f=sine\n")).unwrap();
    let (code, text) = lab(&["lemma64", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(code, 1, "{text}");

    let (code, text) = lab(&["lemma64"], dir.path());
    assert_eq!(code, 0, "{text}");
    let first = std::fs::read(dir.path().join("lemma64.csv")).unwrap();
    lab(&["lemma64"], dir.path());
    assert_eq!(first, std::fs::read(dir.path().join("lemma64.csv")).unwrap());
}
