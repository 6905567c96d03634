//! Problem files, run reports, traces and scheme comparison.

mod compare;
mod run;
mod selftest;
mod spec;

pub use compare::{compare_schemes, ComparisonRow, COMPARISON_FILE};
pub use run::{run_experiment, write_trace_csv, Failure, RunReport};
pub use selftest::{selftest, CheckResult};
pub use spec::{
    load_problem, BifunctionSpec, BuiltProblem, HalfSpaceSpec, MappingSpec, ProblemSpec, SetSpec, SpaceSpec, SCHEMA_VERSION,
};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "HYBRID_EP_OUT_DIR";

/// Loads every `*.json` file of `dir`, sorted by file name.
pub fn load_dir(dir: &std::path::Path) -> crate::Result<Vec<ProblemSpec>> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(crate::Error::InvalidParameter(format!("no *.json problem files in {}", dir.display())));
    }
    paths.iter().map(|p| load_problem(p)).collect()
}
