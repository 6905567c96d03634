use std::path::Path;
use std::time::Instant;

use super::run::{num, opt, report_from_trace, RunReport};
use super::spec::ProblemSpec;
use crate::error::{Error, Result};
use crate::solver::Solver;

pub const COMPARISON_FILE: &str = "comparison.csv";

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonRow {
    /// 1 for the fastest scheme to reach `1e-6`; schemes that never reach it
    /// rank last, ordered by final distance.
    pub rank: usize,
    pub scheme: String,
    pub name: String,
    pub termination: String,
    pub iterations: usize,
    pub iterations_to_1e3: Option<usize>,
    pub iterations_to_1e6: Option<usize>,
    pub final_distance: Option<f64>,
    pub worst_containment_margin: Option<f64>,
    pub worst_monotonicity_violation: f64,
    pub margins_within_tolerance: bool,
}

/// Runs every spec (concurrently, one thread per scheme) and writes
/// `comparison.csv` into `out_dir`. All specs must describe the same
/// problem; every spec is validated before anything runs.
pub fn compare_schemes(specs: &[ProblemSpec], out_dir: &Path) -> Result<Vec<ComparisonRow>> {
    let first = specs.first().ok_or_else(|| Error::InvalidParameter("empty comparison grid".into()))?;
    for s in specs {
        if !first.same_problem(s) {
            return Err(Error::InvalidParameter(format!(
                "mismatched problems: {:?} and {:?} differ outside the scheme settings",
                first.name, s.name
            )));
        }
    }
    let built = specs
        .iter()
        .map(|s| {
            s.build().map_err(|e| match e {
                Error::RequiresHilbert(m) => Error::RequiresHilbert(format!("{m} (spec {:?})", s.name)),
                other => other,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let outcomes: Vec<Result<(RunReport, Option<usize>, Option<usize>)>> = std::thread::scope(|scope| {
        let handles: Vec<_> = specs
            .iter()
            .zip(&built)
            .map(|(spec, b)| {
                scope.spawn(move || {
                    let start = Instant::now();
                    let trace = Solver::new(&b.problem, b.config.clone(), b.stop, b.tolerances)?.run();
                    let report = report_from_trace(spec, b, &trace, start.elapsed().as_secs_f64());
                    Ok((report, trace.iterations_to(1e-3), trace.iterations_to(1e-6)))
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("comparison worker panicked")).collect()
    });

    let mut rows = Vec::with_capacity(specs.len());
    for outcome in outcomes {
        let (report, to3, to6) = outcome?;
        rows.push(ComparisonRow {
            rank: 0,
            scheme: report.scheme,
            name: report.name,
            termination: report.termination,
            iterations: report.iterations,
            iterations_to_1e3: to3,
            iterations_to_1e6: to6,
            final_distance: report.distance_to_oracle,
            worst_containment_margin: report.worst_containment_margin,
            worst_monotonicity_violation: report.worst_monotonicity_violation,
            margins_within_tolerance: report.margins_within_tolerance,
        });
    }
    rows.sort_by(|a, b| {
        let key = |r: &ComparisonRow| (r.iterations_to_1e6.unwrap_or(usize::MAX), r.final_distance.unwrap_or(f64::INFINITY));
        let (ka, kb) = (key(a), key(b));
        ka.0.cmp(&kb.0).then(ka.1.total_cmp(&kb.1))
    });
    for (i, r) in rows.iter_mut().enumerate() {
        r.rank = i + 1;
    }

    std::fs::create_dir_all(out_dir)?;
    let path = out_dir.join(COMPARISON_FILE);
    let io = |e: csv::Error| Error::Io(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(&path).map_err(io)?;
    w.write_record([
        "rank",
        "scheme",
        "name",
        "termination",
        "iterations",
        "iterations_to_1e-3",
        "iterations_to_1e-6",
        "final_distance",
        "worst_containment_margin",
        "worst_monotonicity_violation",
        "margins_within_tolerance",
    ])
    .map_err(io)?;
    let count = |v: Option<usize>| v.map(|n| n.to_string()).unwrap_or_default();
    for r in &rows {
        w.write_record([
            r.rank.to_string(),
            r.scheme.clone(),
            r.name.clone(),
            r.termination.clone(),
            r.iterations.to_string(),
            count(r.iterations_to_1e3),
            count(r.iterations_to_1e6),
            opt(r.final_distance),
            opt(r.worst_containment_margin),
            num(r.worst_monotonicity_violation),
            r.margins_within_tolerance.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush()?;
    Ok(rows)
}
