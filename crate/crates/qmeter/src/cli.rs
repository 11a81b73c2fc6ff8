//! Command dispatch and report emission: the user-facing surface behind the
//! `qmeter` binary.
//!
//! Every command is a pure function of (scenario, flags): the human-readable
//! table rounds to 6 significant digits, the `--json` report carries the
//! full binary-float values (serde_json emits shortest round-trip decimals),
//! so identical inputs give byte-identical machine output.

use serde_json::{json, Value};

use crate::apparatus::{conditional_meter_shift, CouplingFamily};
use crate::determinism::{
    decompose, real_matrix_family_check, weak_value, zero_error_residuals,
};
use crate::error::{Error, Result};
use crate::error_analysis::{optimal_assignment, ozawa_error, ValueAssignment};
use crate::hilbert::sigma_x;
use crate::measurement::outcome_probabilities;
use crate::quasiprob::{estimate_from_quasiprob, joint_quasiprob, negativity};
use crate::sampler::sample_outcomes;
use crate::scenario::{Measurement, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Validate,
    Probs,
    Error,
    Optimize,
    Certify,
    Decompose,
    Quasiprob,
    Weakmeas,
    Sample,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ToleranceProfile {
    Default,
    Strict,
}

impl ToleranceProfile {
    /// Residual magnitude below which a scenario certifies deterministic.
    pub fn deterministic_tol(self) -> f64 {
        match self {
            ToleranceProfile::Default => 1e-8,
            ToleranceProfile::Strict => 1e-10,
        }
    }

    /// Most negative table entry still counted as classical-representable.
    pub fn classical_tol(self) -> f64 {
        match self {
            ToleranceProfile::Default => 1e-10,
            ToleranceProfile::Strict => 1e-12,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Flags {
    pub n: u64,
    pub seed: u64,
    pub phi_grid: Vec<f64>,
    pub b_psi: Option<f64>,
    pub profile: ToleranceProfile,
    /// ANSI styling for verdicts; disabled by QMETER_NO_COLOR.
    pub color: bool,
}

impl Default for Flags {
    fn default() -> Self {
        Self {
            n: 10_000,
            seed: 0,
            phi_grid: vec![0.2, 0.1, 0.05],
            b_psi: None,
            profile: ToleranceProfile::Default,
            color: false,
        }
    }
}

pub struct CommandOutput {
    pub human: String,
    pub json: Value,
}

/// Format with 6 significant digits for the human-readable tables.
pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let a = x.abs();
    if (1e-4..1e6).contains(&a) {
        let magnitude = a.log10().floor() as i32;
        let prec = (5 - magnitude).max(0) as usize;
        format!("{x:.prec$}")
    } else {
        format!("{x:.5e}")
    }
}

fn opt_sig6(x: Option<f64>) -> String {
    x.map_or_else(|| "undefined".to_string(), sig6)
}

fn verdict(text: &str, good: bool, color: bool) -> String {
    if !color {
        return text.to_string();
    }
    if good {
        format!("\x1b[32m{text}\x1b[0m")
    } else {
        format!("\x1b[31m{text}\x1b[0m")
    }
}

fn assignment_json(a: &ValueAssignment) -> Value {
    Value::Object(
        a.iter()
            .map(|(l, v)| (l.to_string(), v.map_or(Value::Null, |x| json!(x))))
            .collect(),
    )
}

fn matrix_json(m: &nalgebra::DMatrix<crate::hilbert::C64>) -> Value {
    json!((0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| vec![m[(r, c)].re, m[(r, c)].im]).collect::<Vec<_>>())
        .collect::<Vec<_>>())
}

fn required_assignment(scenario: &Scenario) -> Result<&ValueAssignment> {
    scenario.assignment.as_ref().ok_or(Error::NoAssignment)
}

/// Execute one command against a validated scenario.
pub fn run(cmd: Command, scenario: &Scenario, flags: &Flags) -> Result<CommandOutput> {
    match cmd {
        Command::Validate => validate_cmd(scenario),
        Command::Probs => probs_cmd(scenario),
        Command::Error => error_cmd(scenario),
        Command::Optimize => optimize_cmd(scenario),
        Command::Certify => certify_cmd(scenario, flags),
        Command::Decompose => decompose_cmd(scenario, flags),
        Command::Quasiprob => quasiprob_cmd(scenario, flags),
        Command::Weakmeas => weakmeas_cmd(scenario, flags),
        Command::Sample => sample_cmd(scenario, flags),
    }
}

fn validate_cmd(scenario: &Scenario) -> Result<CommandOutput> {
    // parse already enforced the type invariants; re-derive the POVM so
    // apparatus scenarios get their completeness/positivity checked too
    let povm = scenario.measurement.povm()?;
    let kind = match &scenario.measurement {
        Measurement::Basis(_) => "basis",
        Measurement::Povm(_) => "povm",
        Measurement::Apparatus(_) => "apparatus",
        Measurement::Coupling(_) => "coupling",
    };
    let labels = povm.labels();
    let human = format!(
        "scenario valid\n  dim        {}\n  measurement {} ({} outcomes)\n  outcomes   {}\n",
        scenario.dim,
        kind,
        labels.len(),
        labels.join(", ")
    );
    let json = json!({
        "command": "validate",
        "valid": true,
        "dim": scenario.dim,
        "measurement": kind,
        "outcomes": labels,
    });
    Ok(CommandOutput { human, json })
}

fn probs_cmd(scenario: &Scenario) -> Result<CommandOutput> {
    let povm = scenario.measurement.povm()?;
    let probs = outcome_probabilities(&povm, &scenario.state)?;
    let mut human = String::from("outcome probabilities\n  label        P(m)\n");
    for (l, p) in &probs {
        human.push_str(&format!("  {:<12} {}\n", l, sig6(*p)));
    }
    let json = json!({
        "command": "probs",
        "probabilities": probs.iter().map(|(l, p)| json!({"label": l, "p": p})).collect::<Vec<_>>(),
    });
    Ok(CommandOutput { human, json })
}

fn report_rows_json(report: &crate::error_analysis::ErrorReport) -> Vec<Value> {
    report
        .outcomes
        .iter()
        .map(|o| {
            json!({
                "label": o.label,
                "p": o.probability,
                "assigned": o.assigned,
                "error_sq": o.error_sq,
                "optimal": o.optimal,
                "min_error_sq": o.min_error_sq,
            })
        })
        .collect()
}

fn error_cmd(scenario: &Scenario) -> Result<CommandOutput> {
    let assign = required_assignment(scenario)?;
    let povm = scenario.measurement.povm()?;
    let report = ozawa_error(&scenario.state, &povm, &scenario.observable, assign)?;
    let mut human = String::from(
        "squared measurement error\n  label        P(m)      assigned    eps^2       optimal     min eps^2\n",
    );
    for o in &report.outcomes {
        human.push_str(&format!(
            "  {:<12} {:<9} {:<11} {:<11} {:<11} {}\n",
            o.label,
            sig6(o.probability),
            opt_sig6(o.assigned),
            sig6(o.error_sq),
            opt_sig6(o.optimal),
            sig6(o.min_error_sq)
        ));
    }
    human.push_str(&format!(
        "  total eps^2 {}   minimum achievable {}\n",
        sig6(report.total_error_sq),
        sig6(report.min_total_error_sq)
    ));
    let json = json!({
        "command": "error",
        "outcomes": report_rows_json(&report),
        "total_error_sq": report.total_error_sq,
        "min_total_error_sq": report.min_total_error_sq,
    });
    Ok(CommandOutput { human, json })
}

fn optimize_cmd(scenario: &Scenario) -> Result<CommandOutput> {
    let povm = scenario.measurement.povm()?;
    let (assign, report) = optimal_assignment(&scenario.state, &povm, &scenario.observable)?;
    let mut human =
        String::from("optimal value assignment\n  label        P(m)      A_opt       min eps^2\n");
    for o in &report.outcomes {
        human.push_str(&format!(
            "  {:<12} {:<9} {:<11} {}\n",
            o.label,
            sig6(o.probability),
            opt_sig6(o.optimal),
            sig6(o.min_error_sq)
        ));
    }
    human.push_str(&format!("  min total error {}\n", sig6(report.min_total_error_sq)));
    let json = json!({
        "command": "optimize",
        "assignment": assignment_json(&assign),
        "outcomes": report_rows_json(&report),
        "min_total_error_sq": report.min_total_error_sq,
    });
    Ok(CommandOutput { human, json })
}

fn certify_cmd(scenario: &Scenario, flags: &Flags) -> Result<CommandOutput> {
    let basis = scenario.measurement.basis()?;
    let povm = crate::measurement::basis_to_povm(basis);
    let (assign, source) = match &scenario.assignment {
        Some(a) => (a.clone(), "scenario"),
        None => {
            let (a, _) = optimal_assignment(&scenario.state, &povm, &scenario.observable)?;
            (a, "optimal")
        }
    };
    let report = zero_error_residuals(&scenario.state, basis, &scenario.observable, &assign)?;
    let real_family = real_matrix_family_check(basis, &scenario.observable, &scenario.state)?;
    let deterministic = report.max_residual < flags.profile.deterministic_tol();
    let mut human = format!(
        "zero-error certificate (assignment: {source})\n  label        assigned    |r_m|       Re r_m      Im r_m\n"
    );
    for (label, r) in &report.residuals {
        human.push_str(&format!(
            "  {:<12} {:<11} {:<11} {:<11} {}\n",
            label,
            opt_sig6(assign.get(label)?),
            sig6(r.norm()),
            sig6(r.re),
            sig6(r.im)
        ));
    }
    human.push_str(&format!(
        "  max |r_m| {}   total eps^2 {}   real-matrix family: {}\n  verdict: {}\n",
        sig6(report.max_residual),
        sig6(report.total_error_sq),
        real_family,
        verdict(
            if deterministic { "deterministic" } else { "not deterministic" },
            deterministic,
            flags.color
        )
    ));
    let json = json!({
        "command": "certify",
        "assignment_source": source,
        "assignment": assignment_json(&assign),
        "residuals": report.residuals.iter().map(|(l, r)| json!({
            "label": l, "re": r.re, "im": r.im, "abs": r.norm(),
        })).collect::<Vec<_>>(),
        "max_residual": report.max_residual,
        "total_error_sq": report.total_error_sq,
        "real_matrix_family": real_family,
        "deterministic": deterministic,
    });
    Ok(CommandOutput { human, json })
}

fn decompose_cmd(scenario: &Scenario, flags: &Flags) -> Result<CommandOutput> {
    let basis = scenario.measurement.basis()?;
    let povm = crate::measurement::basis_to_povm(basis);
    let (assign, source) = match &scenario.assignment {
        Some(a) => (a.clone(), "scenario"),
        None => {
            let (a, _) = optimal_assignment(&scenario.state, &povm, &scenario.observable)?;
            (a, "optimal")
        }
    };
    let b_psi = flags.b_psi.unwrap_or(scenario.b_psi);
    let d = decompose(&scenario.observable, basis, &assign, b_psi, &scenario.state)?;
    let human = format!(
        "operator decomposition A = B + M (assignment: {source})\n  B_psi          {}\n  eigen residual {}  (||(A - M)psi - B_psi psi||)\n",
        sig6(b_psi),
        sig6(d.eigen_residual)
    );
    let json = json!({
        "command": "decompose",
        "assignment_source": source,
        "b_psi": b_psi,
        "m_matrix": matrix_json(d.m_op.matrix()),
        "b_matrix": matrix_json(d.b_op.matrix()),
        "eigen_residual": d.eigen_residual,
    });
    Ok(CommandOutput { human, json })
}

fn quasiprob_cmd(scenario: &Scenario, flags: &Flags) -> Result<CommandOutput> {
    let povm = scenario.measurement.povm()?;
    let table = joint_quasiprob(&scenario.state, &povm, &scenario.observable)?;
    let neg = negativity(&table);
    let classical = neg.min_entry >= -flags.profile.classical_tol();
    let est = estimate_from_quasiprob(&table);
    let mut human = String::from("joint quasiprobability table q(a, m)\n  a \\ m       ");
    for c in &table.cols {
        human.push_str(&format!("{c:<12}"));
    }
    human.push('\n');
    for (row, entries) in table.rows.iter().zip(&table.entries) {
        human.push_str(&format!("  {:<11} ", sig6(row.value)));
        for q in entries {
            human.push_str(&format!("{:<12}", sig6(*q)));
        }
        human.push('\n');
    }
    human.push_str("  A_opt from table: ");
    human.push_str(
        &table
            .cols
            .iter()
            .map(|l| Ok(format!("{l}={}", opt_sig6(est.get(l)?))))
            .collect::<Result<Vec<_>>>()?
            .join("  "),
    );
    human.push_str(&format!(
        "\n  min entry {}   negative mass {}\n  verdict: {}\n",
        sig6(neg.min_entry),
        sig6(neg.negative_mass),
        verdict(
            if classical { "classical-representable" } else { "non-classical" },
            classical,
            flags.color
        )
    ));
    let json = json!({
        "command": "quasiprob",
        "rows": table.rows.iter().map(|r| json!({"eigenvalue": r.value, "rank": r.rank})).collect::<Vec<_>>(),
        "cols": table.cols,
        "entries": table.entries,
        "min_entry": neg.min_entry,
        "negative_mass": neg.negative_mass,
        "classical_representable": classical,
        "estimate": assignment_json(&est),
    });
    Ok(CommandOutput { human, json })
}

fn weakmeas_cmd(scenario: &Scenario, flags: &Flags) -> Result<CommandOutput> {
    // sweep the qubit-meter coupling over the phi grid, post-selecting on
    // each measurement-basis vector in turn
    let basis = match &scenario.measurement {
        Measurement::Basis(b) => b,
        _ => return Err(Error::UnsupportedMeasurement),
    };
    let meter_obs = sigma_x();
    let mut rows_json = Vec::new();
    let mut human = String::from(
        "weak measurement sweep (shift / phi vs Re weak value)\n  postselect   phi        shift/phi   Re A_w      |deviation|\n",
    );
    for (label, m_vec) in basis.iter() {
        let wv = match weak_value(&scenario.state, m_vec, &scenario.observable) {
            Ok(wv) => wv,
            Err(Error::VanishingPostSelection { .. }) => continue,
            Err(e) => return Err(e),
        };
        for &phi in &flags.phi_grid {
            let fam = CouplingFamily::new(scenario.observable.clone(), phi);
            let shift = conditional_meter_shift(&fam, &scenario.state, m_vec, &meter_obs)?;
            let scaled = shift / phi;
            human.push_str(&format!(
                "  {:<12} {:<10} {:<11} {:<11} {}\n",
                label,
                sig6(phi),
                sig6(scaled),
                sig6(wv.value.re),
                sig6((scaled - wv.value.re).abs())
            ));
            rows_json.push(json!({
                "postselect": label,
                "phi": phi,
                "shift_over_phi": scaled,
                "weak_value_re": wv.value.re,
                "weak_value_im": wv.value.im,
                "postselect_probability": wv.postselect_probability,
            }));
        }
    }
    let json = json!({
        "command": "weakmeas",
        "meter_observable": "sigma_x",
        "rows": rows_json,
    });
    Ok(CommandOutput { human, json })
}

fn sample_cmd(scenario: &Scenario, flags: &Flags) -> Result<CommandOutput> {
    let povm = scenario.measurement.povm()?;
    let report = sample_outcomes(&povm, &scenario.state, flags.n, flags.seed)?;
    let mut human = format!(
        "sampled outcomes (n = {}, seed = {})\n  label        count      frequency   P(m)        within 3 sigma\n",
        report.n, report.seed
    );
    for c in &report.counts {
        human.push_str(&format!(
            "  {:<12} {:<10} {:<11} {:<11} {}\n",
            c.label,
            c.count,
            sig6(c.frequency),
            sig6(c.probability),
            c.within_3_sigma
        ));
    }
    let json = json!({
        "command": "sample",
        "n": report.n,
        "seed": report.seed,
        "counts": report.counts.iter().map(|c| json!({
            "label": c.label,
            "count": c.count,
            "frequency": c.frequency,
            "p": c.probability,
            "within_3_sigma": c.within_3_sigma,
        })).collect::<Vec<_>>(),
    });
    Ok(CommandOutput { human, json })
}
