//! The admissibility report of one scale set.

use gns_params::check_constraints;

use crate::config::LabConfig;
use crate::output::{Artifact, Outcome};
use crate::LabError;

pub fn run(cfg: &LabConfig) -> Result<Outcome, LabError> {
    let lambda = cfg.lambdas_or(&[32]);
    if lambda.len() != 1 {
        return Err(LabError::Config(format!("constraints takes a single lambda, got {lambda:?}")));
    }
    let scales = cfg.scales(lambda[0])?;
    let report = check_constraints(&scales, &cfg.params(), &cfg.space()?);
    let mut manifest = crate::base_manifest("constraints", cfg);
    manifest.extend_prefixed("", scales.manifest_entries());
    let unenforced: Vec<&str> = report.failures().iter().filter(|c| !c.enforced).map(|c| c.name).collect();
    manifest.push("unenforced_failures", unenforced.join(","));
    let mut summary = Vec::new();
    for c in &report.rows {
        let tag = match (c.pass, c.enforced) {
            (true, _) => "pass",
            (false, true) => "FAIL",
            (false, false) => "fail (reported only)",
        };
        summary.push(format!("{:<28} {:>14e} {} {:<14e} {tag}", c.name, c.lhs, c.relation, c.rhs));
    }
    Ok(Outcome {
        campaign: "constraints".into(),
        artifacts: vec![Artifact::text("constraints.csv", report.to_csv())],
        manifest,
        passed: report.all_enforced_pass(),
        summary,
    })
}
