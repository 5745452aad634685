//! Command-line harness over the solver library: kernel characteristics and
//! root tables, single solves on benchmark or CSV data, convergence tables,
//! and the noisy-data step-size optimization studies.
//!
//! Reports go to stdout or `--out PATH`, as CSV (metadata in `#`-prefixed
//! lines ahead of the data section) or JSON. Exit codes: 0 success, 2
//! configuration error, 3 numerical error, 4 I/O error.

mod input;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use thiserror::Error;

use report::Report;
use volterra_heat::experiment::{
    convergence_table, error_norm, fibonacci_optimize_h, scaling_exponents, OptimizationResult,
};
use volterra_heat::forward::{sample_rhs, BenchmarkFunction, Mesh};
use volterra_heat::kernel::{find_first_root, kernel_antiderivative, kernel_at_zero, KernelSpec};
use volterra_heat::solver::{solve, Scheme, SolveResult};
use volterra_heat::{ExperimentError, KernelError, SolveError};

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io { .. } => 4,
            _ => 3,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "volterra-heat",
    version,
    about = "Solve a first-kind Volterra equation with a truncated heat kernel and reproduce its benchmark studies"
)]
struct Cli {
    /// Write the report to this path instead of stdout
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Report format
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Record a generation timestamp in the metadata header
    #[arg(long, global = true)]
    stamp: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Midpoint,
    Product,
}

impl From<SchemeArg> for Scheme {
    fn from(value: SchemeArg) -> Self {
        match value {
            SchemeArg::Midpoint => Scheme::Midpoint,
            SchemeArg::Product => Scheme::ProductIntegration,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum BenchmarkArg {
    Phi1,
    Phi2,
}

impl From<BenchmarkArg> for BenchmarkFunction {
    fn from(value: BenchmarkArg) -> Self {
        match value {
            BenchmarkArg::Phi1 => BenchmarkFunction::Phi1,
            BenchmarkArg::Phi2 => BenchmarkFunction::Phi2,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print K_N(0), the first kernel root t*, and the half-integral check
    KernelInfo {
        /// Kernel truncation order
        #[arg(long = "N", value_parser = clap::value_parser!(u32).range(1..))]
        order: u32,
    },
    /// Tabulate t* and K_N(0) over a range of orders, split by parity
    /// (series 1 = even, series 2 = odd)
    Roots {
        #[arg(long = "n-min", value_parser = clap::value_parser!(u32).range(1..))]
        n_min: u32,
        #[arg(long = "n-max", value_parser = clap::value_parser!(u32).range(1..))]
        n_max: u32,
    },
    /// Reconstruct phi from benchmark data or a custom right-hand side
    Solve {
        /// Kernel truncation order
        #[arg(long = "N", value_parser = clap::value_parser!(u32).range(1..))]
        order: u32,
        #[arg(long, value_enum)]
        scheme: SchemeArg,
        /// Benchmark boundary function (omit when using --input)
        #[arg(long, value_enum, conflicts_with = "input")]
        benchmark: Option<BenchmarkArg>,
        /// Mesh horizon T
        #[arg(long = "T", default_value_t = 1.0, conflicts_with = "input")]
        horizon: f64,
        /// Number of mesh cells
        #[arg(long, conflicts_with_all = ["h", "input"])]
        n: Option<usize>,
        /// Step size h = T/n (must divide T)
        #[arg(long, conflicts_with = "input")]
        h: Option<f64>,
        /// Two-column CSV (t_i, y_i) sampled at uniform nodes t_i = i*h
        #[arg(long, value_name = "PATH")]
        input: Option<PathBuf>,
    },
    /// Error tables for both schemes on meshes over the unit horizon
    Convergence {
        /// Kernel truncation order
        #[arg(long = "N", value_parser = clap::value_parser!(u32).range(1..))]
        order: u32,
        #[arg(long, value_enum)]
        benchmark: BenchmarkArg,
        /// Comma-separated cell counts (default 64,128,256,512,1024)
        #[arg(long = "n-list", value_delimiter = ',')]
        n_list: Option<Vec<usize>>,
    },
    /// Fibonacci search for the error-minimizing step under sawtooth noise
    Optimize {
        /// Kernel truncation order
        #[arg(long = "N", value_parser = clap::value_parser!(u32).range(1..))]
        order: u32,
        #[arg(long, value_enum)]
        scheme: SchemeArg,
        #[arg(long, value_enum)]
        benchmark: BenchmarkArg,
        /// Sawtooth noise amplitude
        #[arg(long)]
        delta: f64,
        /// Mesh horizon T
        #[arg(long = "T")]
        horizon: f64,
        /// Lower end of the step search interval (default max(1e-4, T/1000))
        #[arg(long = "h-lo")]
        h_lo: Option<f64>,
        /// Upper end of the step search interval (default T/4)
        #[arg(long = "h-hi")]
        h_hi: Option<f64>,
    },
    /// Optimize across noise amplitudes and fit the h(delta), error(delta)
    /// power laws
    Scaling {
        /// Kernel truncation order
        #[arg(long = "N", value_parser = clap::value_parser!(u32).range(1..))]
        order: u32,
        #[arg(long, value_enum)]
        scheme: SchemeArg,
        #[arg(long, value_enum)]
        benchmark: BenchmarkArg,
        /// Comma-separated noise amplitudes (default 1e-1,1e-2,1e-4,1e-5)
        #[arg(long, value_delimiter = ',')]
        deltas: Option<Vec<f64>>,
        /// Mesh horizon T
        #[arg(long = "T")]
        horizon: f64,
        #[arg(long = "h-lo")]
        h_lo: Option<f64>,
        #[arg(long = "h-hi")]
        h_hi: Option<f64>,
    },
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    let stamp = cli.stamp.then(|| {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0)
    });
    match run(&cli.command, stamp).and_then(|report| emit(&cli, &report)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn emit(cli: &Cli, report: &Report) -> Result<(), CliError> {
    let bytes = match cli.format {
        Format::Csv => report.to_csv(),
        Format::Json => report.to_json(),
    };
    match &cli.out {
        Some(path) => std::fs::write(path, &bytes).map_err(|e| CliError::Io {
            path: path.display().to_string(),
            source: e,
        }),
        None => std::io::stdout()
            .write_all(&bytes)
            .map_err(|e| CliError::Io {
                path: "<stdout>".into(),
                source: e,
            }),
    }
}

fn run(command: &Command, stamp: Option<u64>) -> Result<Report, CliError> {
    match command {
        Command::KernelInfo { order } => kernel_info(*order, stamp),
        Command::Roots { n_min, n_max } => roots(*n_min, *n_max, stamp),
        Command::Solve {
            order,
            scheme,
            benchmark,
            horizon,
            n,
            h,
            input,
        } => solve_command(*order, *scheme, *benchmark, *horizon, *n, *h, input, stamp),
        Command::Convergence {
            order,
            benchmark,
            n_list,
        } => convergence(*order, *benchmark, n_list.clone(), stamp),
        Command::Optimize {
            order,
            scheme,
            benchmark,
            delta,
            horizon,
            h_lo,
            h_hi,
        } => {
            let interval = search_interval(*horizon, *h_lo, *h_hi)?;
            optimize(*order, *scheme, *benchmark, *delta, *horizon, interval, stamp)
        }
        Command::Scaling {
            order,
            scheme,
            benchmark,
            deltas,
            horizon,
            h_lo,
            h_hi,
        } => {
            let interval = search_interval(*horizon, *h_lo, *h_hi)?;
            scaling(
                *order,
                *scheme,
                *benchmark,
                deltas.clone(),
                *horizon,
                interval,
                stamp,
            )
        }
    }
}

fn kernel_info(order: u32, stamp: Option<u64>) -> Result<Report, CliError> {
    let spec = KernelSpec::new(order);
    let root = match find_first_root(spec) {
        Ok(root) => Some(root),
        // K_1 is strictly positive; report the absent root as empty fields
        Err(KernelError::NoRootFound { .. }) if order == 1 => None,
        Err(e) => return Err(e.into()),
    };
    let half_integral = root.map(|r| kernel_antiderivative(spec, r.t_star));
    Ok(Report {
        command: "kernel-info",
        config: json!({ "N": order }),
        summary: vec![],
        columns: vec!["N", "k_at_zero", "t_star", "residual", "half_integral"],
        rows: vec![vec![
            json!(order),
            json!(kernel_at_zero(spec)),
            root.map_or(Value::Null, |r| json!(r.t_star)),
            root.map_or(Value::Null, |r| json!(r.residual)),
            half_integral.map_or(Value::Null, |v| json!(v)),
        ]],
        stamp,
    })
}

fn roots(n_min: u32, n_max: u32, stamp: Option<u64>) -> Result<Report, CliError> {
    if n_max < n_min {
        return Err(CliError::Config(format!(
            "--n-max ({n_max}) must be at least --n-min ({n_min})"
        )));
    }
    let mut rows = Vec::new();
    for order in n_min..=n_max {
        let spec = KernelSpec::new(order);
        let root = find_first_root(spec)?;
        let series = if order % 2 == 0 { 1 } else { 2 };
        rows.push(vec![
            json!(order),
            json!(series),
            json!(root.t_star),
            json!(root.residual),
            json!(kernel_at_zero(spec)),
        ]);
    }
    Ok(Report {
        command: "roots",
        config: json!({ "n_min": n_min, "n_max": n_max }),
        summary: vec![],
        columns: vec!["N", "series", "t_star", "residual", "k_at_zero"],
        rows,
        stamp,
    })
}

#[allow(clippy::too_many_arguments)]
fn solve_command(
    order: u32,
    scheme: SchemeArg,
    benchmark: Option<BenchmarkArg>,
    horizon: f64,
    n: Option<usize>,
    h: Option<f64>,
    input: &Option<PathBuf>,
    stamp: Option<u64>,
) -> Result<Report, CliError> {
    let spec = KernelSpec::new(order);
    let scheme: Scheme = scheme.into();

    if let Some(path) = input {
        let y = input::read_rhs_csv(path)?;
        let result = solve(spec, scheme, &y)?;
        return Ok(Report {
            command: "solve",
            config: json!({
                "N": order,
                "scheme": scheme.label(),
                "input": path.display().to_string(),
                "T": y.mesh().horizon(),
                "n": y.mesh().cells(),
            }),
            summary: vec![("min_abs_denominator", json!(result.min_abs_denominator))],
            columns: vec!["i", "t", "phi"],
            rows: phi_rows(&result, None),
            stamp,
        });
    }

    let f: BenchmarkFunction = benchmark
        .ok_or_else(|| CliError::Config("either --benchmark or --input is required".into()))?
        .into();
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(CliError::Config(format!("--T must be positive, got {horizon}")));
    }
    let cells = match (n, h) {
        (Some(cells), None) => {
            if cells == 0 {
                return Err(CliError::Config("--n must be at least 1".into()));
            }
            cells
        }
        (None, Some(step)) => {
            if !(step.is_finite() && step > 0.0) {
                return Err(CliError::Config(format!("--h must be positive, got {step}")));
            }
            let real = horizon / step;
            let rounded = real.round();
            if rounded < 1.0 || (real - rounded).abs() > 1e-9 * rounded {
                return Err(CliError::Config(format!(
                    "--h {step} does not divide the horizon {horizon} into whole cells"
                )));
            }
            rounded as usize
        }
        (None, None) => {
            return Err(CliError::Config(
                "one of --n or --h is required with --benchmark".into(),
            ));
        }
        (Some(_), Some(_)) => unreachable!("clap rejects --n together with --h"),
    };
    let mesh = Mesh::new(horizon, cells);
    let y = sample_rhs(spec, f, mesh);
    let result = solve(spec, scheme, &y)?;
    let max_error = error_norm(|t| f.eval(t), &result);
    Ok(Report {
        command: "solve",
        config: json!({
            "N": order,
            "scheme": scheme.label(),
            "benchmark": f.label(),
            "T": horizon,
            "n": cells,
        }),
        summary: vec![
            ("max_error", json!(max_error)),
            ("min_abs_denominator", json!(result.min_abs_denominator)),
        ],
        columns: vec!["i", "t", "phi", "exact", "abs_error"],
        rows: phi_rows(&result, Some(f)),
        stamp,
    })
}

fn phi_rows(result: &SolveResult, truth: Option<BenchmarkFunction>) -> Vec<Vec<Value>> {
    let mesh = result.mesh;
    result
        .phi
        .values()
        .iter()
        .enumerate()
        .map(|(idx, &phi)| {
            let t = mesh.midpoint(idx + 1);
            let mut row = vec![json!(idx + 1), json!(t), json!(phi)];
            if let Some(f) = truth {
                let exact = f.eval(t);
                row.push(json!(exact));
                row.push(json!((exact - phi).abs()));
            }
            row
        })
        .collect()
}

fn convergence(
    order: u32,
    benchmark: BenchmarkArg,
    n_list: Option<Vec<usize>>,
    stamp: Option<u64>,
) -> Result<Report, CliError> {
    let cells = n_list.unwrap_or_else(|| vec![64, 128, 256, 512, 1024]);
    if cells.contains(&0) {
        return Err(CliError::Config("--n-list entries must be at least 1".into()));
    }
    let steps: Vec<f64> = cells.iter().map(|&n| 1.0 / n as f64).collect();
    let f: BenchmarkFunction = benchmark.into();
    let report = convergence_table(KernelSpec::new(order), f, &steps)?;
    Ok(Report {
        command: "convergence",
        config: json!({
            "N": order,
            "benchmark": f.label(),
            "n_list": report.rows.iter().map(|r| r.n).collect::<Vec<_>>(),
        }),
        summary: vec![
            ("order_midpoint", json!(report.estimated_orders.midpoint)),
            ("order_product", json!(report.estimated_orders.product)),
        ],
        columns: vec!["h", "n", "error_midpoint", "error_product"],
        rows: report
            .rows
            .iter()
            .map(|r| {
                vec![
                    json!(r.h),
                    json!(r.n),
                    json!(r.error_midpoint),
                    json!(r.error_product),
                ]
            })
            .collect(),
        stamp,
    })
}

fn search_interval(
    horizon: f64,
    h_lo: Option<f64>,
    h_hi: Option<f64>,
) -> Result<(f64, f64), CliError> {
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(CliError::Config(format!("--T must be positive, got {horizon}")));
    }
    let lo = h_lo.unwrap_or_else(|| (1e-4f64).max(horizon / 1000.0));
    let hi = h_hi.unwrap_or(horizon / 4.0);
    if !(lo.is_finite() && hi.is_finite() && 0.0 < lo && lo < hi) {
        return Err(CliError::Config(format!(
            "step interval must satisfy 0 < h-lo < h-hi, got ({lo}, {hi})"
        )));
    }
    if hi > horizon / 4.0 * (1.0 + 1e-12) {
        return Err(CliError::Config(format!(
            "--h-hi ({hi}) must not exceed T/4 = {}",
            horizon / 4.0
        )));
    }
    Ok((lo, hi))
}

fn optimization_row(r: &OptimizationResult) -> Vec<Value> {
    vec![
        json!(r.delta),
        json!(r.h_opt),
        json!(r.n_opt),
        json!(r.error_at_opt),
        json!(r.iterations),
    ]
}

#[allow(clippy::too_many_arguments)]
fn optimize(
    order: u32,
    scheme: SchemeArg,
    benchmark: BenchmarkArg,
    delta: f64,
    horizon: f64,
    interval: (f64, f64),
    stamp: Option<u64>,
) -> Result<Report, CliError> {
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(CliError::Config(format!(
            "--delta must be nonnegative, got {delta}"
        )));
    }
    let scheme: Scheme = scheme.into();
    let f: BenchmarkFunction = benchmark.into();
    let result =
        fibonacci_optimize_h(KernelSpec::new(order), f, scheme, delta, horizon, interval)?;
    Ok(Report {
        command: "optimize",
        config: json!({
            "N": order,
            "scheme": scheme.label(),
            "benchmark": f.label(),
            "T": horizon,
            "delta": delta,
            "h_lo": interval.0,
            "h_hi": interval.1,
        }),
        summary: vec![],
        columns: vec!["delta", "h_opt", "n_opt", "error_at_opt", "iterations"],
        rows: vec![optimization_row(&result)],
        stamp,
    })
}

#[allow(clippy::too_many_arguments)]
fn scaling(
    order: u32,
    scheme: SchemeArg,
    benchmark: BenchmarkArg,
    deltas: Option<Vec<f64>>,
    horizon: f64,
    interval: (f64, f64),
    stamp: Option<u64>,
) -> Result<Report, CliError> {
    let mut deltas = deltas.unwrap_or_else(|| vec![1e-1, 1e-2, 1e-4, 1e-5]);
    if deltas.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
        return Err(CliError::Config(
            "--deltas entries must be positive for the power-law fit".into(),
        ));
    }
    deltas.sort_by(|a, b| b.partial_cmp(a).expect("finite deltas"));
    deltas.dedup();
    let scheme: Scheme = scheme.into();
    let f: BenchmarkFunction = benchmark.into();
    let spec = KernelSpec::new(order);
    let results = deltas
        .iter()
        .map(|&delta| fibonacci_optimize_h(spec, f, scheme, delta, horizon, interval))
        .collect::<Result<Vec<_>, _>>()?;
    let (slope_h, slope_err) = scaling_exponents(&results)?;
    Ok(Report {
        command: "scaling",
        config: json!({
            "N": order,
            "scheme": scheme.label(),
            "benchmark": f.label(),
            "T": horizon,
            "deltas": deltas,
            "h_lo": interval.0,
            "h_hi": interval.1,
        }),
        summary: vec![
            ("slope_h", json!(slope_h)),
            ("slope_err", json!(slope_err)),
        ],
        columns: vec!["delta", "h_opt", "n_opt", "error_at_opt", "iterations"],
        rows: results.iter().map(optimization_row).collect(),
        stamp,
    })
}
