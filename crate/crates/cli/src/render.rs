//! Plain-text reports.

use std::fmt::Write as _;

use num_complex::Complex64;

use narratables::algebra::{AlgebraWarning, CMatrix, SameHistory, WSolution};
use narratables::clusterkit::{render_combination, ClusterVerdict, MomentumKernel};
use narratables::geometry::{collision_schedule, CollisionGroup, Rational};
use narratables::narrative::{History, Report, Sample, Scenario};

/// ANSI styling, enabled or not.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Style {
    pub enabled: bool,
}

impl Style {
    pub const PLAIN: Style = Style { enabled: false };

    fn wrap(&self, code: &str, s: &str) -> String {
        if self.enabled {
            format!("\x1b[{code}m{s}\x1b[0m")
        } else {
            s.to_owned()
        }
    }

    pub fn bold(&self, s: &str) -> String {
        self.wrap("1", s)
    }

    pub fn good(&self, s: &str) -> String {
        self.wrap("32", s)
    }

    pub fn bad(&self, s: &str) -> String {
        self.wrap("31", s)
    }

    pub fn dim(&self, s: &str) -> String {
        self.wrap("2", s)
    }
}

/// Avoids printing `-0`.
fn clean(x: f64) -> f64 {
    x + 0.0
}

pub fn complex(z: Complex64) -> String {
    format!("{:+.9e}{:+.9e}i", clean(z.re), clean(z.im))
}

pub fn matrix(m: &CMatrix, indent: &str) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| complex(m[(i, j)])).collect();
        let _ = writeln!(out, "{indent}[{}]", row.join("  "));
    }
    out
}

fn pairs(group: &CollisionGroup) -> String {
    group
        .pairs()
        .iter()
        .map(|(a, b)| format!("({a},{b})"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn schedule_line(groups: &[CollisionGroup]) -> String {
    if groups.is_empty() {
        return "none".to_owned();
    }
    groups
        .iter()
        .map(|g| format!("τ={} {{{}}}", g.tau, pairs(g)))
        .collect::<Vec<_>>()
        .join("  ")
}

/// Overlap magnitudes sampled strictly between consecutive breakpoints.
pub fn mid_interval_overlaps(samples: &[Sample], keys: &[Rational]) -> Vec<f64> {
    let two = Rational::from_integer(2.into());
    keys.windows(2)
        .filter_map(|w| {
            let mid = (&w[0] + &w[1]) / &two;
            samples.iter().find(|s| s.key == mid).map(|s| s.overlap_magnitude)
        })
        .collect()
}

pub fn narratability(report: &Report, scenario: &Scenario, tol: f64, style: Style) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} {}: rules {} vs {}, tolerance {tol:e}",
        style.bold("scenario"),
        report.scenario,
        report.rules.0,
        report.rules.1
    );
    let (mut equal_ids, mut differ_ids) = (Vec::new(), Vec::new());
    for (i, v) in report.verdicts.iter().enumerate() {
        let groups = collision_schedule(scenario.worldlines(), &v.foliation).unwrap_or_default();
        let _ = writeln!(out, "{} {i}  {}", style.bold("foliation"), v.foliation);
        let _ = writeln!(out, "  collision groups ({}): {}", v.group_count, schedule_line(&groups));
        let cmp = &v.comparison;
        let min = cmp.samples.iter().map(|s| s.overlap_magnitude).fold(f64::INFINITY, f64::min);
        match &cmp.witness {
            None => {
                equal_ids.push(i.to_string());
                let _ = writeln!(out, "  histories {} (min overlap {min:.12})", style.good("equal"));
            }
            Some(w) => {
                differ_ids.push(i.to_string());
                let _ = writeln!(
                    out,
                    "  histories {}: first at τ={} (segment {}), overlap {:.12}, deviation {:.3e}",
                    style.bad("differ"),
                    w.tau,
                    w.segment,
                    w.overlap_magnitude,
                    w.deviation
                );
            }
        }
        let keys: Vec<Rational> = groups.iter().map(|g| g.key.clone()).collect();
        let mids = mid_interval_overlaps(&cmp.samples, &keys);
        if !mids.is_empty() {
            let list: Vec<String> = mids.iter().map(|m| format!("{m:.12}")).collect();
            let _ = writeln!(out, "  mid-interval overlap: {}", list.join(" "));
        }
        for w in &v.warnings {
            let _ = writeln!(out, "  {} {w}", style.bad("warning:"));
        }
    }
    let verdict = if report.non_narratable {
        style.bad("NON_NARRATABLE")
    } else if differ_ids.is_empty() {
        style.good("NARRATABLE")
    } else {
        style.bad("DISTINGUISHABLE")
    };
    let list = |v: &[String]| if v.is_empty() { "none".to_owned() } else { v.join(", ") };
    let _ = writeln!(
        out,
        "{} {verdict} (equal under foliations: {}; different under: {})",
        style.bold("verdict:"),
        list(&equal_ids),
        list(&differ_ids)
    );
    let _ = writeln!(out, "{} {}", style.dim("note:"), Report::INTERPRETATION);
    out
}

/// Leaf range of segments `first..=last`.
fn interval(history: &History, first: usize, last: usize) -> String {
    let bps = history.breakpoints();
    let lo = if first == 0 { "-∞".to_owned() } else { bps[first - 1].to_string() };
    let hi = bps.get(last).map(ToString::to_string).unwrap_or_else(|| "∞".to_owned());
    let open = if first == 0 { "(" } else { "[" };
    format!("{open}{lo}, {hi})")
}

pub fn history(
    history: &History,
    scenario: &Scenario,
    rule: &str,
    foliation_id: usize,
    style: Style,
) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} {}: rule {rule}, foliation {foliation_id}  {}",
        style.bold("scenario"),
        scenario.name(),
        history.foliation()
    );
    let _ = writeln!(out, "collision groups: {}", schedule_line(history.groups()));
    let bps: Vec<String> = history.breakpoints().iter().map(ToString::to_string).collect();
    let _ = writeln!(
        out,
        "breakpoints τ: {}",
        if bps.is_empty() { "none".to_owned() } else { bps.join(", ") }
    );
    // Runs of identical segments are shown once.
    let segs = history.segments();
    let mut runs: Vec<(usize, usize)> = Vec::new();
    for (k, s) in segs.iter().enumerate() {
        match runs.last_mut() {
            Some((first, last)) if segs[*first] == *s => *last = k,
            _ => runs.push((k, k)),
        }
    }
    let _ = writeln!(out, "segments: {}", runs.len());
    for (n, (first, last)) in runs.iter().enumerate() {
        let _ = writeln!(out, "  {} {n} τ∈{}: {}", style.bold("segment"), interval(history, *first, *last), segs[*first]);
    }
    for w in history.warnings() {
        let _ = writeln!(out, "{} {w}", style.bad("warning:"));
    }
    out
}

pub fn cluster(kernel: &MomentumKernel, verdict: &ClusterVerdict, canonical: Option<&MomentumKernel>, style: Style) -> String {
    let mut out = String::new();
    let names = kernel.slot_names();
    let _ = writeln!(
        out,
        "{} in {{{}}} out {{{}}}",
        style.bold("kernel"),
        kernel.in_slots().join(", "),
        kernel.out_slots().join(", ")
    );
    if kernel.deltas().is_empty() {
        let _ = writeln!(out, "deltas: none");
    }
    for row in kernel.deltas() {
        let _ = writeln!(out, "  δ³({})", render_combination(&names, row));
    }
    if let Some(s) = &kernel.spin_structure {
        let _ = writeln!(out, "spin structure: {s} (not analyzed)");
    }
    if kernel.smooth_prefactor_present {
        let _ = writeln!(out, "smooth prefactor: present (not analyzed)");
    }
    let _ = writeln!(
        out,
        "overall momentum conservation: {}",
        if verdict.conserves_momentum { style.good("yes") } else { style.bad("no") }
    );
    let _ = writeln!(out, "rank: {}", verdict.rank);
    let status = if verdict.compliant {
        style.good("compliant")
    } else if verdict.conserves_momentum {
        style.bad("violation")
    } else {
        style.bad("non-conserving")
    };
    let _ = writeln!(out, "{} {status}", style.bold("cluster decomposition:"));
    if let Some(c) = canonical {
        let _ = writeln!(out, "canonical form:");
        for row in c.deltas() {
            let _ = writeln!(out, "  δ³({})", render_combination(&names, row));
        }
    }
    if let Some(w) = &verdict.witness {
        let subset: Vec<&str> = w.support.iter().map(|&j| names[j]).collect();
        let kind = if w.is_proper_subset(kernel.width()) { "proper subset" } else { "all slots" };
        let _ = writeln!(
            out,
            "witness: δ³({}) constrains {kind} {{{}}}",
            render_combination(&names, &w.coefficients),
            subset.join(", ")
        );
    }
    out
}

fn warnings(out: &mut String, warnings: &[AlgebraWarning], style: Style) {
    for w in warnings {
        let _ = writeln!(out, "{} {w}", style.bad("warning:"));
    }
}

pub fn residual_table(
    table: &std::collections::BTreeMap<String, f64>,
    hermiticity: &std::collections::BTreeMap<String, f64>,
    style: Style,
) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", style.bold("bracket residuals ‖[A,B] − required‖_F"));
    for (name, r) in table {
        let _ = writeln!(out, "  {name:<8} {:.6e}", clean(*r));
    }
    let _ = writeln!(out, "{}", style.bold("hermiticity defects ‖A − A†‖_F"));
    for (name, d) in hermiticity {
        let _ = writeln!(out, "  {name:<8} {:.6e}", clean(*d));
    }
    out
}

pub fn w_solution(sol: &WSolution, axis: usize, style: Style) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} K{axis}, dim {}", style.bold("boost correction W for axis"), sol.w.nrows());
    if !sol.energies.is_empty() {
        let e: Vec<String> = sol.energies.iter().map(|x| format!("{:+.9e}", clean(*x))).collect();
        let _ = writeln!(out, "energies: {}", e.join(" "));
    }
    let _ = writeln!(out, "W =");
    out.push_str(&matrix(&sol.w, "  "));
    let _ = writeln!(
        out,
        "residual ‖[K0,V] + [W,H]‖_F = {:.6e} (scale {:.6e})",
        clean(sol.residual),
        sol.scale
    );
    if sol.degenerate_obstructions.is_empty() {
        let _ = writeln!(out, "degenerate obstructions: {}", style.good("none"));
    } else {
        let list: Vec<String> = sol.degenerate_obstructions.iter().map(|(a, b)| format!("({a},{b})")).collect();
        let _ = writeln!(out, "degenerate obstructions: {}", style.bad(&list.join(" ")));
    }
    warnings(&mut out, &sol.warnings, style);
    out
}

pub fn same_history(r: &SameHistory, style: Style) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", style.bold("c(t) = ⟨w(t)|u(t)⟩"));
    for (t, c) in &r.samples {
        let _ = writeln!(out, "  t={:+.9e}  c={}  |c|={:.12}", clean(*t), complex(*c), c.norm());
    }
    let verdict = if r.same { style.good("same history") } else { style.bad("different histories") };
    let _ = writeln!(out, "{} {verdict}", style.bold("verdict:"));
    warnings(&mut out, &r.warnings, style);
    out
}

pub fn boost_check(residual: f64, nontrivial: bool, style: Style) -> String {
    let verdict = if nontrivial {
        style.bad("nontrivial (Wψ not proportional to ψ)")
    } else {
        style.good("trivial (Wψ = c′ψ)")
    };
    format!("‖Wψ − ⟨ψ|Wψ⟩ψ‖ = {:.6e}\n{} {verdict}\n", clean(residual), style.bold("boost action:"))
}
