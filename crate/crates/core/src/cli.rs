//! The `cweber` command line: argument parsing and subcommand dispatch.
//!
//! Machine-readable output goes to `out`, diagnostics to `err`. Exit codes:
//! 0 success, 1 input or validation error, 2 non-convergence, 3 certificate
//! failure.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::baseline::{grid_oracle, projected_subgradient, GridSpec, StepRule};
use crate::certificates::{check_certificates, CertificateReport, Outcome};
use crate::experiments::{run_batch, BatchConfig};
use crate::geometry::ConvexRegion;
use crate::scenarios::{bounding_box, random_instance, random_region, sample_feasible_points};
use crate::solver::{solve, SolverConfig, Status};
use crate::weber::WeberInstance;
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;
pub const EXIT_CERTIFICATE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "cweber", version, about = "Constrained Weber location solver")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one instance over a region and print the solution as JSON.
    Solve(SolveArgs),
    /// Check the descent certificates at sampled feasible points.
    Verify(VerifyArgs),
    /// Minimize with an independent method and print point and objective.
    Oracle(OracleArgs),
    /// Run the seeded benchmark batch and write report files.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long)]
    pub region: PathBuf,
    #[arg(long, default_value_t = 1e-5)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 100_000)]
    pub max_iter: usize,
    /// Write the iterate trace as CSV (iter, x1..xn, f, step_norm).
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Instance to sample from; random instances are drawn when omitted.
    #[arg(long, requires = "region")]
    pub instance: Option<PathBuf>,
    #[arg(long, requires = "instance")]
    pub region: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OracleMethod {
    Grid,
    Subgradient,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long, value_enum)]
    pub method: OracleMethod,
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long)]
    pub region: PathBuf,
    /// Initial grid spacing.
    #[arg(long, default_value_t = 0.1)]
    pub resolution: f64,
    #[arg(long, default_value_t = 3)]
    pub rounds: usize,
    /// Grid window `xmin,ymin,xmax,ymax`; defaults to the enlarged vertex box.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub bounds: Option<Vec<f64>>,
    /// Subgradient iterations.
    #[arg(long, default_value_t = 10_000)]
    pub steps: usize,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub experiments: Option<usize>,
    /// Run 1000 experiments unless --experiments is given.
    #[arg(long)]
    pub full: bool,
    #[arg(long, default_value_t = 50)]
    pub m: usize,
    #[arg(long, default_value_t = 1e-5)]
    pub epsilon: f64,
    #[arg(long)]
    pub baseline_steps: Option<usize>,
    #[arg(long, default_value_t = 10.0)]
    pub vertex_std: f64,
    #[arg(long, default_value_t = 10.0)]
    pub weight_max: f64,
    #[arg(long, default_value = "bench-out")]
    pub out_dir: PathBuf,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut impl Write, err: &mut impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Solve(a) => run_solve(&a, out),
        Command::Verify(a) => run_verify(&a, out, err),
        Command::Oracle(a) => run_oracle(&a, out),
        Command::Bench(a) => run_bench(&a, out, err),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_INPUT
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| {
        Error::InvalidInstance(format!("cannot read {}: {e}", path.display()))
    })
}

fn load_instance(path: &Path) -> Result<WeberInstance> {
    WeberInstance::from_json(&read(path)?)
        .map_err(|e| Error::InvalidInstance(format!("{}: {e}", path.display())))
}

fn load_region(path: &Path) -> Result<ConvexRegion> {
    ConvexRegion::from_json(&read(path)?)
        .map_err(|e| Error::InvalidInstance(format!("{}: {e}", path.display())))
}

fn emit(out: &mut impl Write, value: &serde_json::Value) -> Result<()> {
    writeln!(out, "{}", serde_json::to_string_pretty(value)?)?;
    Ok(())
}

fn run_solve(args: &SolveArgs, out: &mut impl Write) -> Result<i32> {
    let instance = load_instance(&args.instance)?;
    let region = load_region(&args.region)?;
    let config = SolverConfig {
        epsilon: args.epsilon,
        max_iterations: args.max_iter,
        record_trace: args.trace.is_some(),
        ..SolverConfig::default()
    };
    let result = solve(&instance, &region, &config)?;
    if let (Some(path), Some(trace)) = (&args.trace, &result.trace) {
        let mut w = csv::Writer::from_path(path)?;
        let n = instance.dimension();
        let mut header = vec!["iter".to_string()];
        header.extend((1..=n).map(|i| format!("x{i}")));
        header.extend(["f".to_string(), "step_norm".to_string()]);
        w.write_record(&header)?;
        for e in trace {
            let mut row = vec![e.iteration.to_string()];
            row.extend(e.iterate.iter().map(f64::to_string));
            row.extend([e.objective.to_string(), e.step_norm.to_string()]);
            w.write_record(&row)?;
        }
        w.flush()?;
    }
    emit(
        out,
        &json!({
            "solution": result.solution.as_slice(),
            "objective": result.objective,
            "iterations": result.iterations,
            "status": result.status.to_string(),
            "kkt_residual": result.kkt_residual,
        }),
    )?;
    Ok(match result.status {
        Status::Converged => EXIT_OK,
        Status::MaxIterationsReached => EXIT_NOT_CONVERGED,
    })
}

/// Points drawn per random scenario when `verify` has no input files.
const POINTS_PER_SCENARIO: usize = 10;

fn run_verify(args: &VerifyArgs, out: &mut impl Write, err: &mut impl Write) -> Result<i32> {
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut reports: Vec<CertificateReport> = Vec::with_capacity(args.samples);
    if let (Some(i), Some(r)) = (&args.instance, &args.region) {
        let instance = load_instance(i)?;
        let region = load_region(r)?;
        for x in sample_feasible_points(&mut rng, &instance, &region, args.samples)? {
            reports.push(check_certificates(&instance, &region, &x)?);
        }
    } else {
        while reports.len() < args.samples {
            let instance = random_instance(&mut rng, 3..=10, 10.0, 0.5..=2.0);
            let region = random_region(&mut rng, &instance)?;
            let count = POINTS_PER_SCENARIO.min(args.samples - reports.len());
            for x in sample_feasible_points(&mut rng, &instance, &region, count)? {
                reports.push(check_certificates(&instance, &region, &x)?);
            }
        }
    }

    #[derive(Default)]
    struct Tally {
        passed: usize,
        failed: usize,
        skipped: usize,
        tight: usize,
        worst: f64,
        tolerance: f64,
    }
    let mut tallies: BTreeMap<&str, Tally> = BTreeMap::new();
    for report in &reports {
        for c in &report.checks {
            let t = tallies.entry(c.name).or_default();
            t.tolerance = c.tolerance;
            match c.outcome {
                Outcome::Passed => t.passed += 1,
                Outcome::Failed => t.failed += 1,
                Outcome::Skipped => t.skipped += 1,
                Outcome::DegenerateTight => t.tight += 1,
            }
            if c.outcome != Outcome::Skipped && c.residual.is_finite() {
                t.worst = t.worst.max(c.residual);
            }
        }
    }
    writeln!(
        out,
        "{:<32} {:>7} {:>7} {:>7} {:>7} {:>12} {:>10}",
        "certificate", "passed", "failed", "skipped", "tight", "max_resid", "tol"
    )?;
    for (name, t) in &tallies {
        writeln!(
            out,
            "{:<32} {:>7} {:>7} {:>7} {:>7} {:>12.3e} {:>10.1e}",
            name, t.passed, t.failed, t.skipped, t.tight, t.worst, t.tolerance
        )?;
    }
    let failing: Vec<&CertificateReport> = reports.iter().filter(|r| !r.passed()).collect();
    writeln!(out, "samples {} failing {}", reports.len(), failing.len())?;
    for r in failing.iter().take(5) {
        write!(err, "{r}")?;
    }
    Ok(if failing.is_empty() {
        EXIT_OK
    } else {
        EXIT_CERTIFICATE
    })
}

fn run_oracle(args: &OracleArgs, out: &mut impl Write) -> Result<i32> {
    let instance = load_instance(&args.instance)?;
    let region = load_region(&args.region)?;
    let (point, objective) = match args.method {
        OracleMethod::Grid => {
            let (lower, upper) = match args.bounds.as_deref() {
                Some(&[x0, y0, x1, y1]) => ([x0, y0], [x1, y1]),
                Some(b) => {
                    return Err(Error::InvalidConfig(format!(
                        "--bounds needs xmin,ymin,xmax,ymax, got {} values",
                        b.len()
                    )))
                }
                None => bounding_box(&instance, 0.5),
            };
            let spec = GridSpec {
                lower,
                upper,
                resolution: args.resolution,
                refinement_rounds: args.rounds,
            };
            grid_oracle(&instance, &region, &spec)?
        }
        OracleMethod::Subgradient => projected_subgradient(
            &instance,
            &region,
            args.steps,
            StepRule::default_for(&instance),
        )?,
    };
    let method = match args.method {
        OracleMethod::Grid => "grid",
        OracleMethod::Subgradient => "subgradient",
    };
    emit(
        out,
        &json!({ "method": method, "point": point.as_slice(), "objective": objective }),
    )?;
    Ok(EXIT_OK)
}

fn run_bench(args: &BenchArgs, out: &mut impl Write, err: &mut impl Write) -> Result<i32> {
    let defaults = BatchConfig::default();
    let config = BatchConfig {
        num_experiments: args
            .experiments
            .unwrap_or(if args.full { 1000 } else { defaults.num_experiments }),
        m: args.m,
        vertex_std: args.vertex_std,
        weight_max: args.weight_max,
        epsilon: args.epsilon,
        seed: args.seed,
        baseline_steps: args.baseline_steps.unwrap_or(defaults.baseline_steps),
    };
    let report = run_batch(&config)?;
    report.write(&args.out_dir)?;
    writeln!(err, "wrote reports to {}", args.out_dir.display())?;
    writeln!(out, "{}", report.summary_json()?)?;
    Ok(EXIT_OK)
}
