use gns_params::*;
use proptest::prelude::*;

fn q(n: i64, d: i64) -> Q {
    Q::new(n, d)
}

fn space(alpha: Q, gamma: Lebesgue, p: Lebesgue) -> FunctionSpaceSpec {
    FunctionSpaceSpec::new(alpha, gamma, p).unwrap()
}

fn desk(lambda: u64) -> Regime {
    Regime::Desk(DeskScales { lambda, ell: 1.0 / 32.0, delta_q1: 1.0, delta_q2: 1.0 })
}

#[test]
fn varrho_at_one_twelfth() {
    // (2 - 1) / (2 - 13/12) = 12/11 and (2 - 1)(1 - 11/12) = 1/12.
    let eps = q(1, 12);
    assert_eq!(varrho(eps), q(12, 11));
    for id in exponent_identities(eps) {
        assert!(id.holds(), "{} : {} != {}", id.name, id.lhs, id.rhs);
    }
}

#[test]
fn alpha_outside_range_rejected() {
    assert!(matches!(
        FunctionSpaceSpec::new(q(3, 2), Lebesgue::Infinite, Lebesgue::Finite(q(2, 1))),
        Err(ParamError::AlphaRange(_))
    ));
    assert!(FunctionSpaceSpec::new(q(9, 10), Lebesgue::Infinite, Lebesgue::Infinite).is_err());
}

#[test]
fn endpoint_pair_has_no_slack() {
    // alpha = 1, gamma = inf, p = 2 sits on the critical line: the gap
    // 0 + 1 - 1 vanishes, so min{3 - 2 alpha, gap} / 20 = min{1, 0} / 20 = 0.
    let s = space(q(1, 1), Lebesgue::Infinite, Lebesgue::Finite(q(2, 1)));
    assert_eq!(s.supercritical_gap(), q(0, 1));
    assert_eq!(s.epsilon_bound(), q(0, 1));
    assert!(!s.is_supercritical());
    let params = IterationParams { a: 2, b: 20020, beta: 1e-12, epsilon: q(1, 20) };
    assert!(matches!(
        derive_scales(&params, &s, 0, Regime::Paper),
        Err(ParamError::EpsilonTooLarge { .. })
    ));
    // The desk regime still derives scales and reports the failing rows.
    let scales = derive_scales(&params, &s, 0, desk(32)).unwrap();
    let report = check_constraints(&scales, &params, &s);
    let decay = report.get("stress_exponent_decay").unwrap();
    // Literal value 2 - 1 - 1 - 0 + 14/20 against -6/20.
    assert_eq!(decay.lhs, 0.7);
    assert_eq!(decay.rhs, -0.3);
    assert!(!decay.pass);
    assert!(!decay.enforced);
}

#[test]
fn alpha_one_dissipation_term() {
    let s = space(q(1, 1), Lebesgue::Finite(q(3, 1)), Lebesgue::Finite(q(1, 1)));
    let params = IterationParams { a: 2, b: 20020, beta: 1e-12, epsilon: q(1, 100) };
    let scales = derive_scales(&params, &s, 0, desk(16)).unwrap();
    let r = check_constraints(&scales, &params, &s);
    // (3 - 2)/20 on the right-hand side.
    assert_eq!(r.get("epsilon_dissipation").unwrap().rhs, 0.05);
}

#[test]
fn desk_scales_follow_power_laws() {
    let s = space(q(1, 1), Lebesgue::Infinite, Lebesgue::Finite(q(3, 2)));
    let params = IterationParams { a: 2, b: 20020, beta: 1e-12, epsilon: q(1, 20) };
    let sc = derive_scales(&params, &s, 0, desk(64)).unwrap();
    let l = 64f64;
    let close = |a: f64, b: f64| ((a - b) / b).abs() < 1e-13;
    assert!(close(sc.lambda, l));
    assert!(close(sc.r_perp, l.powf(-0.9)));
    assert!(close(sc.r_par, l.powf(-0.5)));
    assert!(close(sc.mu, l.powf(1.2)));
    assert!(close(sc.tau, l.powf(0.8)));
    assert!(close(sc.sigma, l.powf(0.1)));
    // (2 - 12/20) / (2 - 13/20) = 28/27.
    assert_eq!(sc.varrho, q(28, 27));
}

#[test]
fn log_space_mollifier_inequality() {
    // a = 2, b = 128, beta = 1e-6, q = 0: log(ell lambda_0^14) = -6 log 2,
    // log delta_1 = -2e-6 * 128 * log 2.
    let s = space(q(1, 1), Lebesgue::Infinite, Lebesgue::Finite(q(3, 2)));
    let params = IterationParams { a: 2, b: 128, beta: 1e-6, epsilon: q(1, 100) };
    // The gap is 4/3 - 1 = 1/3, so epsilon = 1/100 < 1/60 is admissible.
    let sc = derive_scales(&params, &s, 0, Regime::Paper).unwrap();
    let r = check_constraints(&sc, &params, &s);
    let c = r.get("mollifier_amplitude").unwrap();
    let ln2 = 2f64.ln();
    assert!((c.lhs - (-6.0 * ln2)).abs() < 1e-12);
    assert!((c.rhs - (-2e-6 * 128.0 * ln2)).abs() < 1e-15);
    assert!(c.pass);
    // b = 128 is far below 1000/epsilon = 100000.
    assert!(!r.get("b_large").unwrap().pass);
    assert!(!r.all_enforced_pass());
}

#[test]
fn minimal_b_for_one_twentieth() {
    // b > 20000, even, and 20 | b  ->  20020.
    assert_eq!(minimal_b(q(1, 20)), Some(20020));
    assert_eq!(minimal_b(q(3, 40)), Some(13360));
}

#[test]
fn full_paper_configuration_passes() {
    let s = space(q(1, 1), Lebesgue::Infinite, Lebesgue::Finite(q(3, 2)));
    let eps = q(1, 100);
    let b = minimal_b(eps).unwrap();
    let params = IterationParams { a: 2, b, beta: 0.5 / (100.0 * (b as f64).powi(2)), epsilon: eps };
    let sc = derive_scales(&params, &s, 0, Regime::Paper).unwrap();
    let r = check_constraints(&sc, &params, &s);
    for c in &r.rows {
        assert!(c.pass, "{} failed: {} {} {}", c.name, c.lhs, c.relation, c.rhs);
    }
}

#[test]
fn csv_layout() {
    let s = space(q(1, 1), Lebesgue::Infinite, Lebesgue::Finite(q(3, 2)));
    let params = IterationParams { a: 2, b: 20020, beta: 1e-12, epsilon: q(1, 100) };
    let sc = derive_scales(&params, &s, 0, desk(8)).unwrap();
    let csv = check_constraints(&sc, &params, &s).to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("constraint_name,lhs,rhs,pass"));
    for l in lines {
        assert_eq!(l.split(',').count(), 4, "{l}");
    }
}

#[test]
fn lebesgue_parsing() {
    assert_eq!("inf".parse::<Lebesgue>().unwrap(), Lebesgue::Infinite);
    assert_eq!(Lebesgue::Infinite.recip(), q(0, 1));
    assert_eq!("3/2".parse::<Lebesgue>().unwrap().recip(), q(2, 3));
    assert!(parse_rational("1/0").is_err());
    assert!(parse_rational("x").is_err());
}

fn eps_strategy() -> impl Strategy<Value = Q> {
    (1i64..200, 14i64..4000).prop_map(|(n, d)| Q::new(n, d)).prop_filter("eps < 1/13", |e| *e < Q::new(1, 13))
}

fn space_strategy() -> impl Strategy<Value = FunctionSpaceSpec> {
    (0i64..50, prop_oneof![Just(None), (1i64..20).prop_map(Some)], 1i64..12, 1i64..12).prop_map(
        |(a, g, pn, pd)| {
            let alpha = Q::new(100 + a, 100);
            let gamma = match g {
                None => Lebesgue::Infinite,
                Some(g) => Lebesgue::Finite(Q::from_integer(g)),
            };
            let p = Q::new(pn.max(pd), pd);
            FunctionSpaceSpec::new(alpha, gamma, Lebesgue::Finite(p)).unwrap()
        },
    )
}

proptest! {
    #[test]
    fn exponent_identities_are_exact(eps in eps_strategy()) {
        for id in exponent_identities(eps) {
            prop_assert!(id.holds(), "{}", id.name);
        }
        let rho = varrho(eps);
        prop_assert!(rho > Q::from_integer(1) && rho < Q::from_integer(2));
    }

    #[test]
    fn stress_exponent_decays_below_bound(s in space_strategy(), frac in 1i64..100) {
        prop_assume!(s.is_supercritical());
        // Any epsilon strictly inside the admissible range.
        let eps = s.epsilon_bound() * Q::new(frac, 100);
        prop_assume!(eps > Q::from_integer(0));
        prop_assert!(stress_exponent(&s, eps) <= stress_exponent_bound(&s, eps));
        prop_assert!(stress_exponent_bound(&s, eps) < -Q::from_integer(6) * eps);
    }

    #[test]
    fn stress_exponent_borderline_at_bound(s in space_strategy()) {
        prop_assume!(s.is_supercritical());
        let eps = s.epsilon_bound();
        // Equality in the epsilon bound turns the strict decay into equality
        // whenever the supercritical gap is the active constraint.
        if s.supercritical_gap() <= Q::from_integer(3) - Q::from_integer(2) * s.alpha {
            prop_assert_eq!(stress_exponent_bound(&s, eps), -Q::from_integer(6) * eps);
        } else {
            prop_assert!(stress_exponent_bound(&s, eps) < -Q::from_integer(6) * eps);
        }
    }

    #[test]
    fn derive_is_deterministic(eps in eps_strategy(), l in 3u32..9) {
        let s = FunctionSpaceSpec::new(Q::from_integer(1), Lebesgue::Infinite, Lebesgue::Finite(Q::new(3, 2))).unwrap();
        let params = IterationParams { a: 2, b: 20020, beta: 1e-12, epsilon: eps };
        let a = derive_scales(&params, &s, 0, desk(1 << l)).unwrap();
        let b = derive_scales(&params, &s, 0, desk(1 << l)).unwrap();
        prop_assert_eq!(a, b);
    }
}
