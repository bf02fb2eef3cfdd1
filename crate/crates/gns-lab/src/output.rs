//! Campaign artifacts: check tables, regressions, manifests, and the single
//! collector that writes them.
//!
//! Campaigns build every artifact in memory and hand it over whole, so the
//! files on disk depend only on `(config, seed)` and never on thread timing.
//! No artifact records wall-clock time.

use std::fmt::Write as _;
use std::path::Path;

use gns_blocks::sweep::loglog_slope;

use crate::LabError;

/// One named check or measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: Option<f64>,
    pub pass: Option<bool>,
}

/// Rows with header `name,value,tolerance,pass`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CheckTable {
    pub rows: Vec<Check>,
}

impl CheckTable {
    pub fn measure(&mut self, name: impl Into<String>, value: f64) {
        self.rows.push(Check { name: name.into(), value, tolerance: None, pass: None });
    }

    /// Passes when `value ≤ tolerance`; a NaN value fails.
    pub fn at_most(&mut self, name: impl Into<String>, value: f64, tolerance: f64) {
        self.rows.push(Check { name: name.into(), value, tolerance: Some(tolerance), pass: Some(value <= tolerance) });
    }

    /// Passes when `value ≥ tolerance`.
    pub fn at_least(&mut self, name: impl Into<String>, value: f64, tolerance: f64) {
        self.rows.push(Check { name: name.into(), value, tolerance: Some(tolerance), pass: Some(value >= tolerance) });
    }

    pub fn flag(&mut self, name: impl Into<String>, ok: bool) {
        self.rows.push(Check { name: name.into(), value: f64::from(u8::from(ok)), tolerance: Some(1.0), pass: Some(ok) });
    }

    pub fn extend(&mut self, other: CheckTable) {
        self.rows.extend(other.rows);
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.rows.iter().find(|r| r.name == name)
    }

    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass != Some(false))
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.rows.iter().filter(|r| r.pass == Some(false)).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("name,value,tolerance,pass\n");
        for r in &self.rows {
            let tol = r.tolerance.map(|t| format!("{t:e}")).unwrap_or_default();
            let pass = r.pass.map(|p| p.to_string()).unwrap_or_default();
            let _ = writeln!(s, "{},{:e},{},{}", r.name, r.value, tol, pass);
        }
        s
    }
}

/// A log-log fit of `value` against `x` compared with a predicted slope.
#[derive(Clone, Debug, PartialEq)]
pub struct RegressionResult {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub predicted_slope: f64,
    pub fitted_slope: f64,
    /// `|fitted − predicted|`.
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl RegressionResult {
    /// Fits the points; needs at least four with positive values, otherwise
    /// the slope is NaN and the result fails.
    pub fn fit(label: impl Into<String>, points: Vec<(f64, f64)>, predicted_slope: f64, tolerance: f64) -> Self {
        let usable = points.len() >= 4 && points.iter().all(|&(x, y)| x > 0.0 && y > 0.0 && y.is_finite());
        let fitted_slope = if usable {
            let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
            let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
            loglog_slope(&xs, &ys)
        } else {
            f64::NAN
        };
        let residual = (fitted_slope - predicted_slope).abs();
        Self { label: label.into(), points, predicted_slope, fitted_slope, residual, tolerance, pass: residual <= tolerance }
    }

    /// A fit that passes when the slope is at most `bound`, for quantities
    /// that only have to decrease.
    pub fn decreasing(label: impl Into<String>, points: Vec<(f64, f64)>, bound: f64) -> Self {
        let mut r = Self::fit(label, points, bound, 0.0);
        r.pass = r.fitted_slope < bound;
        r.residual = r.fitted_slope - bound;
        r
    }

    /// Header `x,value,predicted_slope,fitted_slope,residual,pass`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,value,predicted_slope,fitted_slope,residual,pass\n");
        self.append_rows(&mut s);
        s
    }

    fn append_rows(&self, s: &mut String) {
        for &(x, v) in &self.points {
            let _ = writeln!(s, "{x:e},{v:e},{:e},{:e},{:e},{}", self.predicted_slope, self.fitted_slope, self.residual, self.pass);
        }
    }
}

/// Several regressions in one file, with a leading `label` column.
pub fn regressions_csv(results: &[RegressionResult]) -> String {
    let mut s = String::from("label,x,value,predicted_slope,fitted_slope,residual,pass\n");
    for r in results {
        let mut body = String::new();
        r.append_rows(&mut body);
        for line in body.lines() {
            let _ = writeln!(s, "{},{line}", r.label);
        }
    }
    s
}

/// Ordered `key=value` lines.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Manifest {
    pub entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn push(&mut self, key: impl Into<String>, value: impl ToString) {
        self.entries.push((key.into(), value.to_string()));
    }

    pub fn extend_prefixed(&mut self, prefix: &str, entries: Vec<(String, String)>) {
        for (k, v) in entries {
            self.entries.push((format!("{prefix}{k}"), v));
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn text(name: impl Into<String>, text: String) -> Self {
        Self { name: name.into(), bytes: text.into_bytes() }
    }

    pub fn as_text(&self) -> Option<&str> {
        std::str::from_utf8(&self.bytes).ok()
    }
}

/// Everything a campaign produces.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub campaign: String,
    pub artifacts: Vec<Artifact>,
    pub manifest: Manifest,
    /// Conjunction of every pass flag the campaign counts.
    pub passed: bool,
    /// Human-readable lines for the terminal.
    pub summary: Vec<String>,
}

impl Outcome {
    pub fn artifact(&self, name: &str) -> Option<&Artifact> {
        self.artifacts.iter().find(|a| a.name == name)
    }

    /// Writes the artifacts and `manifest.txt` under `dir`, creating
    /// subdirectories named in artifact paths.
    pub fn write(&self, dir: &Path) -> Result<(), LabError> {
        std::fs::create_dir_all(dir)?;
        for a in &self.artifacts {
            let path = dir.join(&a.name);
            if let Some(parent) = path.parent() {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(path, &a.bytes)?;
        }
        std::fs::write(dir.join("manifest.txt"), self.manifest.render())?;
        Ok(())
    }
}
