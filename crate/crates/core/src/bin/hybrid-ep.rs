use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use hybrid_ep::harness::{self, ProblemSpec, OUT_DIR_ENV};

/// Hybrid projection iterations for equilibrium and fixed-point problems.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Iteration cap (overrides the problem file).
    #[arg(long, global = true)]
    max_iter: Option<usize>,

    /// Stop once successive iterates differ by at most this much.
    #[arg(long, global = true)]
    eps_stop: Option<f64>,

    /// Output directory for traces and reports.
    #[arg(long, global = true, env = OUT_DIR_ENV)]
    out_dir: Option<PathBuf>,

    /// Seed for sampled diagnostics.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one problem file and write its trace and report.
    Run { config: PathBuf },
    /// Run every problem file of a directory and write a comparison table.
    Compare { config_dir: PathBuf },
    /// Validate a problem file without running it.
    Check { config: PathBuf },
    /// Run the sampled invariant suites.
    Selftest,
}

impl Cli {
    fn apply(&self, spec: &mut ProblemSpec) {
        if let Some(m) = self.max_iter {
            spec.stop.max_iter = m;
        }
        if let Some(e) = self.eps_stop {
            spec.stop.eps_stop = e;
        }
        if let Some(s) = self.seed {
            spec.seed = s;
        }
    }

    fn out_dir(&self, spec: Option<&ProblemSpec>) -> PathBuf {
        self.out_dir
            .clone()
            .or_else(|| spec.and_then(|s| s.output_dir.clone()))
            .unwrap_or_else(|| PathBuf::from("."))
    }

    fn load(&self, path: &Path) -> hybrid_ep::Result<ProblemSpec> {
        let mut spec = harness::load_problem(path)?;
        self.apply(&mut spec);
        spec.build()?;
        Ok(spec)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn execute(cli: &Cli) -> hybrid_ep::Result<bool> {
    match &cli.command {
        Command::Run { config } => {
            let spec = cli.load(config)?;
            let report = harness::run_experiment(&spec, &cli.out_dir(Some(&spec)))?;
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            println!(
                "{}: {} after {} iterations{}",
                report.name,
                report.termination,
                report.iterations,
                report.distance_to_oracle.map(|d| format!(", distance to oracle {d:.3e}")).unwrap_or_default()
            );
            if let Some(f) = &report.failure {
                println!("failed at iteration {}: {}", f.iteration, f.error);
            }
            if !report.margins_within_tolerance {
                println!("invariant margins out of tolerance");
            }
            Ok(report.success())
        }
        Command::Compare { config_dir } => {
            let mut specs = harness::load_dir(config_dir)?;
            for s in &mut specs {
                cli.apply(s);
            }
            let out = cli.out_dir(specs.first());
            let rows = harness::compare_schemes(&specs, &out)?;
            for r in &rows {
                println!(
                    "{:>2} {:<22} {:<15} iterations {:>6}  to 1e-6: {}",
                    r.rank,
                    r.scheme,
                    r.termination,
                    r.iterations,
                    r.iterations_to_1e6.map(|n| n.to_string()).unwrap_or_else(|| "-".into())
                );
            }
            println!("wrote {}", out.join(harness::COMPARISON_FILE).display());
            Ok(true)
        }
        Command::Check { config } => {
            let spec = cli.load(config)?;
            let built = spec.build()?;
            for w in &built.warnings {
                eprintln!("warning: {w}");
            }
            println!("{}: valid ({} in {:?}, d = {})", spec.name, spec.scheme.scheme, spec.space.kind, spec.space.dim);
            Ok(true)
        }
        Command::Selftest => {
            let results = harness::selftest(cli.seed.unwrap_or(0))?;
            let mut ok = true;
            for r in &results {
                println!(
                    "{} {:<42} worst {:.3e} (tolerance {:.0e})",
                    if r.passed { "PASS" } else { "FAIL" },
                    r.name,
                    r.worst,
                    r.tolerance
                );
                ok &= r.passed;
            }
            Ok(ok)
        }
    }
}
