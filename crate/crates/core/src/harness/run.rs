use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::spec::{BuiltProblem, ProblemSpec};
use crate::equilibrium::equilibrium_residual;
use crate::error::{Error, Result};
use crate::solver::{Solver, Termination, Tolerances, Trace};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub iteration: usize,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub name: String,
    pub scheme: String,
    pub termination: String,
    pub failure: Option<Failure>,
    pub iterations: usize,
    pub final_point: Vec<f64>,
    pub oracle: Option<Vec<f64>>,
    pub distance_to_oracle: Option<f64>,
    /// Smallest reference-solution margin over all cuts (`>= -tol` expected).
    pub worst_containment_margin: Option<f64>,
    /// Largest decrease of `phi(x_n, x_1)` between iterations.
    pub worst_monotonicity_violation: f64,
    /// Largest `phi(x_n, x_1) - phi(u*, x_1)`.
    pub worst_boundedness_violation: Option<f64>,
    pub final_fixed_point_residual: Option<f64>,
    pub final_z_minus_u: Option<f64>,
    /// Sampled `min_y f(x, y)` at the final point (negative values indicate
    /// the point is not an equilibrium).
    pub final_equilibrium_residual: Option<f64>,
    pub margins_within_tolerance: bool,
    pub warnings: Vec<String>,
    pub wall_time_seconds: f64,
    pub trace_file: Option<PathBuf>,
}

impl RunReport {
    /// Converged by the stop rule with every invariant margin in tolerance.
    pub fn success(&self) -> bool {
        self.termination == Termination::Converged.label() && self.margins_within_tolerance
    }
}

pub(crate) fn margins_ok(trace: &Trace, tol: &Tolerances) -> bool {
    let inv = &trace.invariants;
    inv.containment.is_none_or(|m| m >= -tol.containment)
        && inv.monotonicity <= tol.monotonicity
        && inv.boundedness.is_none_or(|b| b <= tol.monotonicity)
}

/// Runs a validated spec, writing `<name>.trace.csv` and `<name>.report.json`
/// into `out_dir` (created if missing). Solver failures are recorded in the
/// report rather than returned as errors.
pub fn run_experiment(spec: &ProblemSpec, out_dir: &Path) -> Result<RunReport> {
    let built = spec.build()?;
    std::fs::create_dir_all(out_dir)?;
    let start = Instant::now();
    let solver = Solver::new(&built.problem, built.config.clone(), built.stop, built.tolerances)?;
    let trace = solver.run();
    let wall = start.elapsed().as_secs_f64();

    let trace_path = out_dir.join(format!("{}.trace.csv", spec.name));
    write_trace_csv(&trace, &trace_path)?;
    let mut report = report_from_trace(spec, &built, &trace, wall);
    for w in built.warnings.iter().rev() {
        if !report.warnings.contains(w) {
            report.warnings.insert(0, w.clone());
        }
    }
    report.trace_file = Some(trace_path);
    let json = serde_json::to_string_pretty(&report).map_err(|e| Error::Io(e.to_string()))?;
    std::fs::write(out_dir.join(format!("{}.report.json", spec.name)), json)?;
    Ok(report)
}

pub(crate) fn report_from_trace(spec: &ProblemSpec, built: &BuiltProblem, trace: &Trace, wall: f64) -> RunReport {
    let last = trace.last().map(|s| &s.diagnostics);
    let failure = match &trace.termination {
        Termination::Failed { iteration, error } => Some(Failure {
            iteration: *iteration,
            error: error.to_string(),
        }),
        _ => None,
    };
    let final_equilibrium_residual = if built.problem.bifunction.is_zero() {
        None
    } else {
        equilibrium_residual(&built.problem.bifunction, &built.problem.set, &trace.final_point, 200, spec.seed, 1.0).ok()
    };
    RunReport {
        name: spec.name.clone(),
        scheme: spec.scheme.scheme.name().to_string(),
        termination: trace.termination.label().to_string(),
        failure,
        iterations: trace.iterations,
        final_point: trace.final_point.iter().copied().collect(),
        oracle: trace.oracle.as_ref().map(|o| o.iter().copied().collect()),
        distance_to_oracle: trace.final_distance_to_oracle,
        worst_containment_margin: trace.invariants.containment,
        worst_monotonicity_violation: trace.invariants.monotonicity,
        worst_boundedness_violation: trace.invariants.boundedness,
        final_fixed_point_residual: last.map(|d| d.fixed_point_residual),
        final_z_minus_u: last.and_then(|d| d.z_minus_u),
        final_equilibrium_residual,
        margins_within_tolerance: margins_ok(trace, &built.tolerances),
        warnings: trace.warnings.clone(),
        wall_time_seconds: wall,
        trace_file: None,
    }
}

pub(crate) fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub(crate) fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// Per-iteration CSV: `n, x_1..x_d, phi_anchor, phi_step,
/// fixed_point_residual, z_minus_x, z_minus_u, solution_contained`.
pub fn write_trace_csv(trace: &Trace, path: &Path) -> Result<()> {
    let io = |e: csv::Error| Error::Io(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    let d = trace.final_point.len();
    let mut header = vec!["n".to_string()];
    header.extend((1..=d).map(|i| format!("x{i}")));
    header.extend(
        ["phi_anchor", "phi_step", "fixed_point_residual", "z_minus_x", "z_minus_u", "solution_contained"].map(String::from),
    );
    w.write_record(&header).map_err(io)?;
    for s in &trace.states {
        let g = &s.diagnostics;
        let mut row = vec![s.n.to_string()];
        row.extend(s.x.iter().map(|v| num(*v)));
        row.push(num(g.phi_anchor));
        row.push(num(g.phi_step));
        row.push(num(g.fixed_point_residual));
        row.push(opt(g.z_minus_x));
        row.push(opt(g.z_minus_u));
        row.push(g.solution_contained.map(|b| b.to_string()).unwrap_or_default());
        w.write_record(&row).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}
