//! Parameter algebra for one level of the convex-integration iteration.
//!
//! Exponents are carried as exact rationals in units of `log λ`, where `λ`
//! is the next frequency `λ_{q+1}`. Floating point only appears when a
//! concrete scale is requested, so the exponent identities that the stress
//! estimates rely on can be checked with `==` on rationals.
//!
//! Two regimes are supported. [`Regime::Paper`] derives every scale from the
//! super-exponential frequency `λ_q = a^(b^q)` and enforces the full list of
//! admissibility conditions. [`Regime::Desk`] fixes `λ` to a small integer so
//! that the construction fits on a laptop grid; the conditions that involve
//! `a`, `b` or `β` are still evaluated but no longer enforced.

use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

/// Exact rational used for every exponent.
pub type Q = Rational64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamError {
    #[error("alpha = {0} lies outside [1, 3/2)")]
    AlphaRange(Q),
    #[error("Lebesgue exponent {name} = {value} must be at least 1")]
    LebesgueRange { name: &'static str, value: String },
    #[error("epsilon must be positive, got {0}")]
    EpsilonSign(Q),
    #[error("epsilon = {eps} exceeds the admissible bound {bound}")]
    EpsilonTooLarge { eps: Q, bound: Q },
    #[error("base frequency a must be at least 2, got {0}")]
    BaseFrequency(u64),
    #[error("desk frequency lambda must be at least 2, got {0}")]
    DeskLambda(u64),
    #[error("desk scale {name} must be positive and finite, got {value}")]
    DeskScale { name: &'static str, value: f64 },
    #[error("cannot parse {0:?} as a rational number")]
    Parse(String),
}

/// Parses `"n"`, `"-n"` or `"n/d"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<Q, ParamError> {
    let t = s.trim();
    let bad = || ParamError::Parse(s.to_string());
    match t.split_once('/') {
        Some((n, d)) => {
            let n: i64 = n.trim().parse().map_err(|_| bad())?;
            let d: i64 = d.trim().parse().map_err(|_| bad())?;
            if d == 0 {
                return Err(bad());
            }
            Ok(Q::new(n, d))
        }
        None => t.parse::<i64>().map(Q::from_integer).map_err(|_| bad()),
    }
}

/// A Lebesgue exponent in `[1, ∞]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Lebesgue {
    Finite(Q),
    Infinite,
}

impl Lebesgue {
    /// `1/p`, with `1/∞ = 0`.
    pub fn recip(self) -> Q {
        match self {
            Lebesgue::Finite(p) => p.recip(),
            Lebesgue::Infinite => Q::zero(),
        }
    }

    pub fn to_f64(self) -> f64 {
        match self {
            Lebesgue::Finite(p) => q_f64(p),
            Lebesgue::Infinite => f64::INFINITY,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Lebesgue::Infinite)
    }
}

impl fmt::Display for Lebesgue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Lebesgue::Finite(p) => write!(f, "{p}"),
            Lebesgue::Infinite => write!(f, "inf"),
        }
    }
}

impl FromStr for Lebesgue {
    type Err = ParamError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "inf" | "infinity" | "Inf" | "∞" => Ok(Lebesgue::Infinite),
            other => parse_rational(other).map(Lebesgue::Finite),
        }
    }
}

pub fn q_f64(x: Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// The function space `C^0_t L^p`-type target: dissipation exponent and the
/// integrability pair `(γ, p)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FunctionSpaceSpec {
    pub alpha: Q,
    pub gamma: Lebesgue,
    pub p: Lebesgue,
}

impl FunctionSpaceSpec {
    pub fn new(alpha: Q, gamma: Lebesgue, p: Lebesgue) -> Result<Self, ParamError> {
        if alpha < Q::one() || alpha >= Q::new(3, 2) {
            return Err(ParamError::AlphaRange(alpha));
        }
        for (name, e) in [("gamma", gamma), ("p", p)] {
            if let Lebesgue::Finite(v) = e {
                if v < Q::one() {
                    return Err(ParamError::LebesgueRange { name, value: v.to_string() });
                }
            }
        }
        Ok(Self { alpha, gamma, p })
    }

    /// `(4α−4)/γ + 2/p − (2α−1)`; positive exactly in the supercritical regime.
    pub fn supercritical_gap(&self) -> Q {
        let four = Q::from_integer(4);
        let two = Q::from_integer(2);
        (four * self.alpha - four) * self.gamma.recip() + two * self.p.recip()
            - (two * self.alpha - Q::one())
    }

    pub fn is_supercritical(&self) -> bool {
        self.supercritical_gap() > Q::zero()
    }

    /// Largest admissible slack exponent, `min{3−2α, gap} / 20`.
    pub fn epsilon_bound(&self) -> Q {
        let dissipation = Q::from_integer(3) - Q::from_integer(2) * self.alpha;
        dissipation.min(self.supercritical_gap()) / Q::from_integer(20)
    }
}

/// The iteration constants `a`, `b`, `β`, `ε`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterationParams {
    pub a: u64,
    pub b: u64,
    pub beta: f64,
    pub epsilon: Q,
}

/// Directly chosen desk-scale magnitudes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeskScales {
    /// The frequency `λ = λ_{q+1}`.
    pub lambda: u64,
    /// Mollification scale.
    pub ell: f64,
    pub delta_q1: f64,
    pub delta_q2: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Regime {
    Paper,
    Desk(DeskScales),
}

/// Power-law exponents of the five building-block scales, in `log λ` units.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Exponents {
    pub r_perp: Q,
    pub r_par: Q,
    pub mu: Q,
    pub tau: Q,
    pub sigma: Q,
}

impl Exponents {
    pub fn new(alpha: Q, eps: Q) -> Self {
        let i = Q::from_integer;
        Self {
            r_perp: i(-1) + i(2) * eps,
            r_par: i(-1) + i(10) * eps,
            mu: i(2) * alpha - i(1) + i(4) * eps,
            tau: i(4) * alpha - i(4) + i(16) * eps,
            sigma: i(2) * eps,
        }
    }
}

/// The Calderón–Zygmund exponent `ϱ = (2−12ε)/(2−13ε)`.
pub fn varrho(eps: Q) -> Q {
    let i = Q::from_integer;
    (i(2) - i(12) * eps) / (i(2) - i(13) * eps)
}

/// One exact exponent identity: `lhs == rhs` as rationals.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactIdentity {
    pub name: &'static str,
    pub lhs: Q,
    pub rhs: Q,
}

impl ExactIdentity {
    pub fn holds(&self) -> bool {
        self.lhs == self.rhs
    }
}

/// The three exponent identities behind the `L^ϱ` stress estimates:
/// `(2−12ε)(1−1/ϱ) = ε`, `(r⊥r∥)^(1/ϱ−1) = λ^ε`, `(r⊥r∥)^(1/ϱ−1/2) = λ^(−1+7ε)`.
pub fn exponent_identities(eps: Q) -> Vec<ExactIdentity> {
    let i = Q::from_integer;
    let rho = varrho(eps);
    let ex = Exponents::new(Q::one(), eps);
    let rr = ex.r_perp + ex.r_par;
    vec![
        ExactIdentity {
            name: "varrho_slack",
            lhs: (i(2) - i(12) * eps) * (Q::one() - rho.recip()),
            rhs: eps,
        },
        ExactIdentity {
            name: "concentration_gain",
            lhs: rr * (rho.recip() - Q::one()),
            rhs: eps,
        },
        ExactIdentity {
            name: "concentration_l2_loss",
            lhs: rr * (rho.recip() - Q::new(1, 2)),
            rhs: i(-1) + i(7) * eps,
        },
    ]
}

/// All scales of one iteration level.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaleSet {
    pub q: u32,
    pub alpha: Q,
    pub epsilon: Q,
    pub exponents: Exponents,
    pub varrho: Q,
    pub desk: bool,
    /// Natural logarithms of `λ_q` and `λ = λ_{q+1}`.
    pub log_lambda_q: f64,
    pub log_lambda: f64,
    pub log_delta_q1: f64,
    pub log_delta_q2: f64,
    pub log_ell: f64,
    pub lambda_q: f64,
    pub lambda: f64,
    pub delta_q1: f64,
    pub delta_q2: f64,
    pub ell: f64,
    pub r_perp: f64,
    pub r_par: f64,
    pub mu: f64,
    pub tau: f64,
    pub sigma: f64,
}

impl ScaleSet {
    /// `λ^e` for a rational exponent.
    pub fn power(&self, e: Q) -> f64 {
        (q_f64(e) * self.log_lambda).exp()
    }

    /// Key/value pairs for manifests.
    pub fn manifest_entries(&self) -> Vec<(String, String)> {
        let mut v = vec![
            ("q".to_string(), self.q.to_string()),
            ("alpha".to_string(), self.alpha.to_string()),
            ("epsilon".to_string(), self.epsilon.to_string()),
            ("varrho".to_string(), self.varrho.to_string()),
            ("desk_mode".to_string(), self.desk.to_string()),
        ];
        let nums = [
            ("lambda_q", self.lambda_q),
            ("lambda", self.lambda),
            ("delta_q1", self.delta_q1),
            ("delta_q2", self.delta_q2),
            ("ell", self.ell),
            ("r_perp", self.r_perp),
            ("r_par", self.r_par),
            ("mu", self.mu),
            ("tau", self.tau),
            ("sigma", self.sigma),
        ];
        v.extend(nums.iter().map(|(k, x)| (k.to_string(), format!("{x:e}"))));
        v
    }
}

/// Derives every scale at level `q`.
///
/// In the paper regime `ε` must satisfy the admissibility bound; in the desk
/// regime it only has to keep the concentration scales ordered
/// (`0 < ε < 1/10`), since the other conditions are asymptotic.
pub fn derive_scales(
    params: &IterationParams,
    space: &FunctionSpaceSpec,
    q: u32,
    regime: Regime,
) -> Result<ScaleSet, ParamError> {
    let eps = params.epsilon;
    if eps <= Q::zero() {
        return Err(ParamError::EpsilonSign(eps));
    }
    let desk = matches!(regime, Regime::Desk(_));
    let bound = if desk { Q::new(1, 10) } else { space.epsilon_bound() };
    let too_large = if desk { eps >= bound } else { eps > bound };
    if too_large {
        return Err(ParamError::EpsilonTooLarge { eps, bound });
    }

    let (log_lambda_q, log_lambda, log_delta_q1, log_delta_q2, log_ell) = match regime {
        Regime::Paper => {
            if params.a < 2 {
                return Err(ParamError::BaseFrequency(params.a));
            }
            let la = (params.a as f64).ln();
            let b = params.b as f64;
            let lq = b.powi(q as i32) * la;
            let lq1 = b * lq;
            let lq2 = b * lq1;
            (lq, lq1, -2.0 * params.beta * lq1, -2.0 * params.beta * lq2, -20.0 * lq)
        }
        Regime::Desk(d) => {
            if d.lambda < 2 {
                return Err(ParamError::DeskLambda(d.lambda));
            }
            for (name, value) in [("ell", d.ell), ("delta_q1", d.delta_q1), ("delta_q2", d.delta_q2)] {
                if !(value > 0.0 && value.is_finite()) {
                    return Err(ParamError::DeskScale { name, value });
                }
            }
            let l = (d.lambda as f64).ln();
            let b = (params.b.max(1)) as f64;
            (l / b, l, d.delta_q1.ln(), d.delta_q2.ln(), d.ell.ln())
        }
    };

    let exponents = Exponents::new(space.alpha, eps);
    let pw = |e: Q| (q_f64(e) * log_lambda).exp();
    Ok(ScaleSet {
        q,
        alpha: space.alpha,
        epsilon: eps,
        exponents,
        varrho: varrho(eps),
        desk,
        log_lambda_q,
        log_lambda,
        log_delta_q1,
        log_delta_q2,
        log_ell,
        lambda_q: log_lambda_q.exp(),
        lambda: log_lambda.exp(),
        delta_q1: log_delta_q1.exp(),
        delta_q2: log_delta_q2.exp(),
        ell: log_ell.exp(),
        r_perp: pw(exponents.r_perp),
        r_par: pw(exponents.r_par),
        mu: pw(exponents.mu),
        tau: pw(exponents.tau),
        sigma: pw(exponents.sigma),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Lt,
    Eq,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Lt => "<",
            Relation::Eq => "==",
        })
    }
}

/// One named inequality with both sides evaluated.
#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub relation: Relation,
    pub pass: bool,
    /// False for conditions that are only reported in the desk regime.
    pub enforced: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintReport {
    pub desk: bool,
    pub rows: Vec<Constraint>,
}

impl ConstraintReport {
    /// Conjunction over the enforced rows.
    pub fn all_enforced_pass(&self) -> bool {
        self.rows.iter().filter(|c| c.enforced).all(|c| c.pass)
    }

    /// Rows that fail; in the desk regime this includes unenforced rows.
    pub fn failures(&self) -> Vec<&Constraint> {
        self.rows.iter().filter(|c| !c.pass).collect()
    }

    pub fn get(&self, name: &str) -> Option<&Constraint> {
        self.rows.iter().find(|c| c.name == name)
    }

    /// CSV with header `constraint_name,lhs,rhs,pass`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("constraint_name,lhs,rhs,pass\n");
        for c in &self.rows {
            s.push_str(&format!("{},{:e},{:e},{}\n", c.name, c.lhs, c.rhs, c.pass));
        }
        s
    }
}

fn exact(name: &'static str, lhs: Q, rel: Relation, rhs: Q, enforced: bool) -> Constraint {
    let pass = match rel {
        Relation::Le => lhs <= rhs,
        Relation::Lt => lhs < rhs,
        Relation::Eq => lhs == rhs,
    };
    Constraint { name, lhs: q_f64(lhs), rhs: q_f64(rhs), relation: rel, pass, enforced }
}

fn float(name: &'static str, lhs: f64, rel: Relation, rhs: f64, enforced: bool) -> Constraint {
    let pass = match rel {
        Relation::Le => lhs <= rhs,
        Relation::Lt => lhs < rhs,
        Relation::Eq => lhs == rhs,
    };
    Constraint { name, lhs, rhs, relation: rel, pass, enforced }
}

/// The full stress exponent `2α−1−2/p−(4α−4)/γ+ε(2+12/p−16/γ)`.
pub fn stress_exponent(space: &FunctionSpaceSpec, eps: Q) -> Q {
    let i = Q::from_integer;
    let base = i(2) * space.alpha - i(1) - i(2) * space.p.recip()
        - (i(4) * space.alpha - i(4)) * space.gamma.recip();
    base + eps * (i(2) + i(12) * space.p.recip() - i(16) * space.gamma.recip())
}

/// The stress exponent with its `ε`-coefficient bounded by 14.
pub fn stress_exponent_bound(space: &FunctionSpaceSpec, eps: Q) -> Q {
    let i = Q::from_integer;
    i(2) * space.alpha - i(1) - i(2) * space.p.recip()
        - (i(4) * space.alpha - i(4)) * space.gamma.recip()
        + i(14) * eps
}

/// Evaluates every inequality the scheme uses. Exponent inequalities are
/// decided in exact arithmetic, magnitude inequalities in log space.
pub fn check_constraints(
    scales: &ScaleSet,
    params: &IterationParams,
    space: &FunctionSpaceSpec,
) -> ConstraintReport {
    let i = Q::from_integer;
    let eps = params.epsilon;
    let strict = !scales.desk;
    let b = i(params.b as i64);
    let mut rows = vec![
        exact("alpha_lower", i(1), Relation::Le, space.alpha, true),
        exact("alpha_upper", space.alpha, Relation::Lt, Q::new(3, 2), true),
        exact(
            "supercritical",
            i(2) * space.alpha - i(1),
            Relation::Lt,
            (i(4) * space.alpha - i(4)) * space.gamma.recip() + i(2) * space.p.recip(),
            strict,
        ),
        exact("b_even", b % i(2), Relation::Eq, Q::zero(), strict),
        exact("b_large", i(1000) / eps, Relation::Lt, b, strict),
        float("beta_positive", 0.0, Relation::Lt, params.beta, strict),
        float(
            "beta_small",
            params.beta,
            Relation::Lt,
            1.0 / (100.0 * (params.b as f64).powi(2)),
            strict,
        ),
        exact(
            "epsilon_dissipation",
            eps,
            Relation::Le,
            (i(3) - i(2) * space.alpha) / i(20),
            strict,
        ),
        exact("epsilon_gap", eps, Relation::Le, space.supercritical_gap() / i(20), strict),
        exact("b_epsilon_integer", (b * eps).fract(), Relation::Eq, Q::zero(), strict),
        exact(
            "stress_exponent_slack",
            stress_exponent(space, eps),
            Relation::Le,
            stress_exponent_bound(space, eps),
            true,
        ),
        exact(
            "stress_exponent_decay",
            stress_exponent_bound(space, eps),
            Relation::Lt,
            -i(6) * eps,
            strict,
        ),
        exact("varrho_above_one", i(1), Relation::Lt, scales.varrho, true),
        exact("varrho_below_two", scales.varrho, Relation::Lt, i(2), true),
        float(
            "mollifier_amplitude",
            scales.log_ell + 14.0 * scales.log_lambda_q,
            Relation::Le,
            scales.log_delta_q1,
            strict,
        ),
        float(
            "mollifier_support",
            2f64.ln() + scales.log_ell,
            Relation::Lt,
            0.5 * scales.log_delta_q2,
            strict,
        ),
    ];
    for id in exponent_identities(eps) {
        rows.push(exact(id.name, id.lhs, Relation::Eq, id.rhs, true));
    }
    ConstraintReport { desk: scales.desk, rows }
}

/// Smallest `b` that is even, exceeds `1000/ε` and makes `bε` an integer.
pub fn minimal_b(eps: Q) -> Option<u64> {
    if eps <= Q::zero() {
        return None;
    }
    let floor = (Q::from_integer(1000) / eps).floor().to_integer() + 1;
    // bε ∈ ℕ means b is a multiple of the reduced denominator of ε; b even
    // means a multiple of lcm(denominator, 2).
    let step = eps.denom().lcm(&2).abs();
    let first = ((floor + step - 1) / step) * step;
    u64::try_from(first).ok()
}

