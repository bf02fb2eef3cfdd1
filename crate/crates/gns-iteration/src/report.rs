//! One-step measurements: mixed space-time norms of the perturbations and
//! stresses by Gauss–Legendre quadrature in time, and the structural checks
//! with their tolerances.

use std::fmt::Write as _;

use gns_blocks::quad::gauss_legendre_nodes;
use gns_torus::norms::lp;

use crate::next::NextLevel;
use crate::relaxed::nsr_residual;
use crate::Result;

#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub name: String,
    pub value: f64,
    /// Present for checks; measurements carry neither tolerance nor verdict.
    pub tolerance: Option<f64>,
    pub pass: Option<bool>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct StepReport {
    pub rows: Vec<ReportRow>,
}

impl StepReport {
    fn measure(&mut self, name: impl Into<String>, value: f64) {
        self.rows.push(ReportRow { name: name.into(), value, tolerance: None, pass: None });
    }

    /// A check passing when `value ≤ tolerance`.
    fn at_most(&mut self, name: &str, value: f64, tolerance: f64) {
        self.rows.push(ReportRow { name: name.into(), value, tolerance: Some(tolerance), pass: Some(value <= tolerance) });
    }

    /// A check passing when `value ≥ tolerance`.
    fn at_least(&mut self, name: &str, value: f64, tolerance: f64) {
        self.rows.push(ReportRow { name: name.into(), value, tolerance: Some(tolerance), pass: Some(value >= tolerance) });
    }

    pub fn get(&self, name: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.name == name)
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        self.get(name).map(|r| r.value)
    }

    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass != Some(false))
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

#[derive(Clone, Debug, PartialEq)]
pub struct MeasureOptions {
    /// Time exponent `γ` and space exponent `p` of the mixed norm; an
    /// infinite `γ` takes the maximum over the time nodes.
    pub gamma: f64,
    pub p: f64,
    /// The stress exponent `ϱ`.
    pub varrho: f64,
    /// Run the structural checks, not only the norms.
    pub checks: bool,
    /// Uniform samples on `[0, 1]` for the support check.
    pub support_samples: usize,
}

/// Time nodes: two panels on each window of `g_(k)`, panels of length at
/// most `0.05` elsewhere inside the support of `f_u` (kept in `[0, 1]`).
pub fn time_nodes(level: &NextLevel) -> Vec<(f64, f64)> {
    let (lo, hi) = level.cutoff.support();
    let (lo, hi) = (lo.max(0.0), hi.min(1.0));
    let mut cuts = vec![lo, hi, level.cutoff.start, level.cutoff.end];
    let mut windows = Vec::new();
    for k in 0..level.temporal.len() {
        for (a, b) in level.temporal.support_intervals(k) {
            cuts.push(a);
            cuts.push(b);
            windows.push((a, b));
        }
    }
    cuts.retain(|c| (lo..=hi).contains(c));
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    let mut nodes = Vec::new();
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let inside = windows.iter().any(|&(x, y)| a >= x - 1e-15 && b <= y + 1e-15);
        let panels = if inside { 2 } else { ((b - a) / 0.05).ceil().max(1.0) as usize };
        nodes.extend(gauss_legendre_nodes(a, b, panels));
    }
    nodes
}

/// Times for the substitution checks: inside each window away from the
/// zero of `g` at its centre, on the plateau of `f_u` away from the windows,
/// and on its down ramp.
pub fn check_times(level: &NextLevel) -> Vec<f64> {
    let mut out = Vec::new();
    for k in 0..level.temporal.len() {
        let (a, b) = level.temporal.support_intervals(k)[0];
        out.push(a + 0.3 * (b - a));
    }
    let (a, b) = level.temporal.support_intervals(0)[0];
    out.push(a + 0.8 * (b - a));
    let c = &level.cutoff;
    for s in [0.4, 0.75] {
        let t = c.start + s * (c.end - c.start);
        if (0.0..=1.0).contains(&t) {
            out.push(t);
        }
    }
    let ramp = c.end + 0.5 * c.ramp;
    if ramp < 1.0 {
        out.push(ramp);
    }
    out
}

pub fn measure_step(level: &NextLevel, opts: &MeasureOptions) -> Result<StepReport> {
    let mut rep = StepReport::default();
    let nodes = time_nodes(level);
    let names = ["w_p", "w_c", "w_t", "w_o", "w"];
    let mut l2tx = [0.0f64; 5];
    let mut l1l2 = [0.0f64; 5];
    let mut lglp = [0.0f64; 5];
    let stress_names = ["r_lin", "r_osc1", "r_osc2", "r_osc3", "r_cor", "r_rem", "r_com", "r_next"];
    let mut l1rho = [0.0f64; 8];
    let mut r_l1tx = 0.0;
    let (mut osc, mut div_pc, mut div_u, mut cons) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let (mut floor, mut ratio, mut recon) = (f64::INFINITY, 0.0f64, 0.0f64);
    // Every time with a nonzero perturbation or stress lies within 2ℓ of
    // the previous stress's time support.
    let (sa, sb) = level.mollified.base.time_support();
    let reach = 2.0 * level.mollified.ell();
    let outside = |t: f64, (w, r): (f64, f64)| (w > 0.0 || r > 0.0) && !(t >= sa - reach && t <= sb + reach);
    let mut violations = 0usize;
    for &(t, wt) in &nodes {
        let s = level.state(t)?;
        let p = &s.perturbation;
        let w = p.total()?;
        for (i, f) in [&p.w_p, &p.w_c, &p.w_t, &p.w_o, &w].into_iter().enumerate() {
            let n2 = lp(f, 2.0);
            l2tx[i] += wt * n2 * n2;
            l1l2[i] += wt * n2;
            let v = lp(f, opts.p);
            lglp[i] = if opts.gamma.is_infinite() { lglp[i].max(v) } else { lglp[i] + wt * v.powf(opts.gamma) };
        }
        let r = s.decomposition.r_next()?;
        for (i, (_, f)) in s.decomposition.components().into_iter().enumerate() {
            l1rho[i] += wt * lp(f, opts.varrho);
        }
        l1rho[7] += wt * lp(&r, opts.varrho);
        r_l1tx += wt * lp(&r, 1.0);
        violations += outside(t, (w.sup(), r.sup())) as usize;
        if opts.checks {
            if let Some(d) = s.oscillation_defect {
                osc = osc.max(d);
            }
            let (a, b) = level.divergence_defects(&s)?;
            div_pc = div_pc.max(a);
            div_u = div_u.max(b);
            cons = cons.max(level.consistency_defect(&s)?);
            let inv = s.amplitudes.invariants(&s.r_star, &level.set);
            floor = floor.min(inv.floor);
            ratio = ratio.max(inv.ratio);
            recon = recon.max(inv.reconstruction);
        }
    }
    for (i, n) in names.iter().enumerate() {
        rep.measure(format!("{n}_L2tx"), l2tx[i].sqrt());
        rep.measure(format!("{n}_L1t_L2x"), l1l2[i]);
        let lg = if opts.gamma.is_infinite() { lglp[i] } else { lglp[i].powf(1.0 / opts.gamma) };
        rep.measure(format!("{n}_Lgamma_t_Lp_x"), lg);
    }
    rep.measure("w_c_over_w_p_L2tx", (l2tx[1] / l2tx[0]).sqrt());
    for (i, n) in stress_names.iter().enumerate() {
        rep.measure(format!("{n}_L1t_Lvarrho_x"), l1rho[i]);
    }
    rep.measure("r_next_L1tx", r_l1tx);
    rep.measure("time_nodes", nodes.len() as f64);
    rep.measure("delta", level.delta);
    if !opts.checks {
        return Ok(rep);
    }
    rep.at_most("oscillation_identity", osc, 1e-9);
    rep.at_most("div_principal_plus_corrector", div_pc, 1e-10);
    rep.at_most("div_velocity", div_u, 1e-10);
    rep.at_most("inverse_divergence_consistency", cons, 1e-9);
    rep.at_least("amplitude_floor", floor, 1.0 - 1e-12);
    rep.at_most("amplitude_ratio", ratio, 1.0);
    rep.at_most("amplitude_reconstruction", recon, 1e-10);

    let (mut leray, mut transport, mut oscc) = (0.0f64, 0.0f64, 0.0f64);
    for t in check_times(level) {
        leray = leray.max(nsr_residual(level, t)?.leray);
        let (a, b) = level.corrector_identities(t)?;
        transport = transport.max(a);
        oscc = oscc.max(b);
    }
    rep.at_most("leray_residual", leray, 1e-6);
    rep.at_most("transport_corrector_identity", transport, 1e-8);
    // The left side differences w_o, whose spectral gradient of a² carries
    // rounding noise near the grid scale; the step that balances it against
    // truncation leaves about 1e-8.
    rep.at_most("oscillation_corrector_identity", oscc, 1e-7);

    let m = opts.support_samples.max(2);
    for i in 0..m {
        let t = i as f64 / (m - 1) as f64;
        violations += outside(t, level.activity(t)?) as usize;
    }
    rep.at_most("temporal_support_violations", violations as f64, 0.0);
    Ok(rep)
}
