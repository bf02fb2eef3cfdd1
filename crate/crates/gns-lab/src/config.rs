//! Flat `key=value` campaign configuration.
//!
//! Blank lines and `#` comments are ignored. The keys `alpha`, `gamma`, `p`,
//! `epsilon`, `lambda`, `grid_n` and `desk_mode` are required in a file;
//! every other key is optional and defaults to the values below. Unknown or
//! repeated keys are errors, so a typo never silently falls back to a default.

use std::collections::BTreeMap;
use std::path::Path;

use gns_params::{
    derive_scales, minimal_b, parse_rational, DeskScales, FunctionSpaceSpec, IterationParams, Lebesgue, Regime, ScaleSet, Q,
};

use crate::LabError;

const REQUIRED: [&str; 7] = ["alpha", "gamma", "p", "epsilon", "lambda", "grid_n", "desk_mode"];

const OPTIONAL: [&str; 27] = [
    "seed",
    "q",
    "a",
    "b",
    "beta",
    "ell",
    "delta_q1",
    "delta_q2",
    "band",
    "trials",
    "matrices",
    "sigmas",
    "lemma_p",
    "decorrelation_f",
    "step_checks",
    "support_samples",
    "snapshots",
    "tol_operator",
    "tol_projection",
    "tol_geometry",
    "tol_identity",
    "tol_slope_block",
    "tol_slope_temporal",
    "tol_slope_lemma",
    "tol_doubling",
    "tol_slope_ratio",
    "tol_trend",
];

/// The smooth factor `f` of the decorrelation check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecorrelationProfile {
    /// A smooth step with a transition far narrower than `1/σ`.
    Step,
    /// `1 + ½ sin 2πx`.
    Sine,
    /// `f ≡ 1`.
    Constant,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// `div ℛ = id`, relative.
    pub operator: f64,
    /// Leray idempotence, gradient annihilation and `(−Δ)¹ = −Δ`.
    pub projection: f64,
    /// Geometric reconstruction.
    pub geometry: f64,
    /// Building-block identities.
    pub identity: f64,
    pub slope_block: f64,
    pub slope_temporal: f64,
    pub slope_lemma: f64,
    /// Relative tolerance on the ratio 2 of the doubling comparison.
    pub doubling: f64,
    /// Slope of `‖w_c‖/‖w_p‖` against its prediction.
    pub slope_ratio: f64,
    /// Largest fitted slope counted as a decrease in the stress trends.
    pub trend: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            operator: 1e-10,
            projection: 1e-12,
            geometry: 1e-12,
            identity: 1e-9,
            slope_block: 0.1,
            slope_temporal: 0.05,
            slope_lemma: 0.15,
            doubling: 0.2,
            slope_ratio: 0.15,
            trend: 0.0,
        }
    }
}

impl Tolerances {
    pub fn manifest_entries(&self) -> Vec<(String, String)> {
        [
            ("tol_operator", self.operator),
            ("tol_projection", self.projection),
            ("tol_geometry", self.geometry),
            ("tol_identity", self.identity),
            ("tol_slope_block", self.slope_block),
            ("tol_slope_temporal", self.slope_temporal),
            ("tol_slope_lemma", self.slope_lemma),
            ("tol_doubling", self.doubling),
            ("tol_slope_ratio", self.slope_ratio),
            ("tol_trend", self.trend),
        ]
        .iter()
        .map(|(k, v)| (k.to_string(), format!("{v:e}")))
        .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabConfig {
    pub alpha: Q,
    pub gamma: Lebesgue,
    pub p: Lebesgue,
    pub epsilon: Q,
    /// `None` lets each campaign pick its own default list.
    pub lambdas: Option<Vec<u64>>,
    pub grid_n: usize,
    pub desk_mode: bool,
    pub seed: u64,
    pub q: u32,
    pub a: u64,
    pub b: u64,
    pub beta: f64,
    pub ell: f64,
    pub delta_q1: f64,
    pub delta_q2: f64,
    /// Jet band of the step campaign; `None` picks per mode.
    pub band: Option<i64>,
    pub trials: usize,
    pub matrices: usize,
    pub sigmas: Vec<i64>,
    pub lemma_p: f64,
    pub decorrelation_f: DecorrelationProfile,
    /// Structural checks during a multi-frequency step sweep.
    pub step_checks: bool,
    pub support_samples: usize,
    /// Snapshot times written by a single step.
    pub snapshots: usize,
    pub tol: Tolerances,
}

impl Default for LabConfig {
    fn default() -> Self {
        let epsilon = Q::new(1, 20);
        let b = minimal_b(epsilon).expect("positive epsilon");
        Self {
            alpha: Q::from_integer(1),
            gamma: Lebesgue::Finite(Q::from_integer(2)),
            p: Lebesgue::Finite(Q::from_integer(2)),
            epsilon,
            lambdas: None,
            grid_n: 256,
            desk_mode: true,
            seed: 7,
            q: 0,
            a: 2,
            b,
            beta: default_beta(b),
            ell: 1.0 / 32.0,
            delta_q1: 1.0,
            delta_q2: 1.0,
            band: None,
            trials: 100,
            matrices: 1000,
            sigmas: vec![4, 8, 16, 32, 64],
            lemma_p: 1.0,
            decorrelation_f: DecorrelationProfile::Step,
            step_checks: false,
            support_samples: 64,
            snapshots: 3,
            tol: Tolerances::default(),
        }
    }
}

/// Half the largest admissible `β`.
fn default_beta(b: u64) -> f64 {
    1.0 / (200.0 * (b as f64).powi(2))
}

fn bad(key: &str, value: &str, why: impl std::fmt::Display) -> LabError {
    LabError::Config(format!("{key} = {value:?}: {why}"))
}

fn number<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, LabError>
where
    T::Err: std::fmt::Display,
{
    value.trim().parse::<T>().map_err(|e| bad(key, value, e))
}

fn positive(key: &str, value: &str) -> Result<f64, LabError> {
    let x: f64 = number(key, value)?;
    if !(x > 0.0 && x.is_finite()) {
        return Err(bad(key, value, "must be positive and finite"));
    }
    Ok(x)
}

/// Parses a comma-separated list.
pub fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>, LabError>
where
    T::Err: std::fmt::Display,
{
    let items: Vec<T> = value.split(',').filter(|s| !s.trim().is_empty()).map(|s| number(key, s)).collect::<Result<_, _>>()?;
    if items.is_empty() {
        return Err(bad(key, value, "empty list"));
    }
    Ok(items)
}

fn boolean(key: &str, value: &str) -> Result<bool, LabError> {
    match value.trim() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(bad(key, value, "expected true or false")),
    }
}

impl LabConfig {
    pub fn load(path: &Path) -> Result<Self, LabError> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, LabError> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| LabError::Config(format!("line {}: expected key=value", i + 1)))?;
            let (k, v) = (k.trim().to_string(), v.trim().to_string());
            if !REQUIRED.contains(&k.as_str()) && !OPTIONAL.contains(&k.as_str()) {
                return Err(LabError::Config(format!("line {}: unknown key {k:?}", i + 1)));
            }
            if map.insert(k.clone(), v).is_some() {
                return Err(LabError::Config(format!("line {}: repeated key {k:?}", i + 1)));
            }
        }
        if let Some(k) = REQUIRED.iter().find(|k| !map.contains_key(**k)) {
            return Err(LabError::Config(format!("missing required key {k:?}")));
        }
        let mut c = Self::default();
        let mut b_given = false;
        let mut beta_given = false;
        for (k, v) in &map {
            let v = v.as_str();
            match k.as_str() {
                "alpha" => c.alpha = parse_rational(v).map_err(|e| bad(k, v, e))?,
                "gamma" => c.gamma = v.parse().map_err(|e| bad(k, v, e))?,
                "p" => c.p = v.parse().map_err(|e| bad(k, v, e))?,
                "epsilon" => c.epsilon = parse_rational(v).map_err(|e| bad(k, v, e))?,
                "lambda" => c.lambdas = Some(parse_list(k, v)?),
                "grid_n" => c.grid_n = number(k, v)?,
                "desk_mode" => c.desk_mode = boolean(k, v)?,
                "seed" => c.seed = number(k, v)?,
                "q" => c.q = number(k, v)?,
                "a" => c.a = number(k, v)?,
                "b" => {
                    c.b = number(k, v)?;
                    b_given = true;
                }
                "beta" => {
                    c.beta = positive(k, v)?;
                    beta_given = true;
                }
                "ell" => c.ell = positive(k, v)?,
                "delta_q1" => c.delta_q1 = positive(k, v)?,
                "delta_q2" => c.delta_q2 = positive(k, v)?,
                "band" => c.band = Some(number(k, v)?),
                "trials" => c.trials = number(k, v)?,
                "matrices" => c.matrices = number(k, v)?,
                "sigmas" => c.sigmas = parse_list(k, v)?,
                "lemma_p" => c.lemma_p = positive(k, v)?,
                "decorrelation_f" => {
                    c.decorrelation_f = match v {
                        "step" => DecorrelationProfile::Step,
                        "sine" => DecorrelationProfile::Sine,
                        "constant" => DecorrelationProfile::Constant,
                        _ => return Err(bad(k, v, "expected step, sine or constant")),
                    }
                }
                "step_checks" => c.step_checks = boolean(k, v)?,
                "support_samples" => c.support_samples = number(k, v)?,
                "snapshots" => c.snapshots = number(k, v)?,
                "tol_operator" => c.tol.operator = positive(k, v)?,
                "tol_projection" => c.tol.projection = positive(k, v)?,
                "tol_geometry" => c.tol.geometry = positive(k, v)?,
                "tol_identity" => c.tol.identity = positive(k, v)?,
                "tol_slope_block" => c.tol.slope_block = positive(k, v)?,
                "tol_slope_temporal" => c.tol.slope_temporal = positive(k, v)?,
                "tol_slope_lemma" => c.tol.slope_lemma = positive(k, v)?,
                "tol_doubling" => c.tol.doubling = positive(k, v)?,
                "tol_slope_ratio" => c.tol.slope_ratio = positive(k, v)?,
                "tol_trend" => c.tol.trend = number(k, v)?,
                _ => unreachable!("keys are validated above"),
            }
        }
        // b and β follow ε unless given.
        if !b_given {
            c.b = minimal_b(c.epsilon).ok_or_else(|| bad("epsilon", &c.epsilon.to_string(), "must be positive"))?;
        }
        if !beta_given {
            c.beta = default_beta(c.b);
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), LabError> {
        if let Some(l) = &self.lambdas {
            if l.iter().any(|&x| x < 2) {
                return Err(LabError::Config(format!("every lambda must be at least 2, got {l:?}")));
            }
        }
        if self.sigmas.iter().any(|&s| s < 1) {
            return Err(LabError::Config(format!("every sigma must be a positive integer, got {:?}", self.sigmas)));
        }
        if self.lemma_p < 1.0 {
            return Err(LabError::Config(format!("lemma_p = {} must be at least 1", self.lemma_p)));
        }
        self.space()?;
        Ok(())
    }

    pub fn space(&self) -> Result<FunctionSpaceSpec, LabError> {
        FunctionSpaceSpec::new(self.alpha, self.gamma, self.p).map_err(|e| LabError::Config(e.to_string()))
    }

    pub fn params(&self) -> IterationParams {
        IterationParams { a: self.a, b: self.b, beta: self.beta, epsilon: self.epsilon }
    }

    /// The λ list, or `default` when none was configured.
    pub fn lambdas_or(&self, default: &[u64]) -> Vec<u64> {
        self.lambdas.clone().unwrap_or_else(|| default.to_vec())
    }

    /// The scale set at frequency `lambda` (desk mode) or at level `q`
    /// (paper mode, where `lambda` is ignored).
    pub fn scales(&self, lambda: u64) -> Result<ScaleSet, LabError> {
        let regime = if self.desk_mode {
            Regime::Desk(DeskScales { lambda, ell: self.ell, delta_q1: self.delta_q1, delta_q2: self.delta_q2 })
        } else {
            Regime::Paper
        };
        derive_scales(&self.params(), &self.space()?, self.q, regime).map_err(|e| LabError::Config(e.to_string()))
    }

    /// Refuses paper-mode scales for campaigns that sample fields on a grid.
    pub fn require_desk(&self, campaign: &str) -> Result<(), LabError> {
        if self.desk_mode {
            Ok(())
        } else {
            Err(LabError::Config(format!(
                "campaign {campaign} samples fields on a grid; paper-mode frequencies cannot be resolved, set desk_mode = true"
            )))
        }
    }

    pub fn manifest_entries(&self) -> Vec<(String, String)> {
        let mut v: Vec<(String, String)> = vec![
            ("config.alpha".into(), self.alpha.to_string()),
            ("config.gamma".into(), self.gamma.to_string()),
            ("config.p".into(), self.p.to_string()),
            ("config.epsilon".into(), self.epsilon.to_string()),
            ("config.grid_n".into(), self.grid_n.to_string()),
            ("config.desk_mode".into(), self.desk_mode.to_string()),
            ("config.seed".into(), self.seed.to_string()),
            ("config.q".into(), self.q.to_string()),
            ("config.a".into(), self.a.to_string()),
            ("config.b".into(), self.b.to_string()),
            ("config.beta".into(), format!("{:e}", self.beta)),
            ("config.ell".into(), format!("{:e}", self.ell)),
            ("config.delta_q1".into(), format!("{:e}", self.delta_q1)),
            ("config.delta_q2".into(), format!("{:e}", self.delta_q2)),
        ];
        if let Some(l) = &self.lambdas {
            v.push(("config.lambda".into(), join(l)));
        }
        v.extend(self.tol.manifest_entries());
        v
    }
}

pub fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}
