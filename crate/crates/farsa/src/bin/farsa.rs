use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use farsa::grid::{
    compare_grids, list_datasets, read_grid_csv, run_grid, write_comparison_csv, write_grid_csv,
    GridConfig, GridRow,
};
use farsa::report::{write_json, write_trace_csv, RunSummary};
use farsa::run::{run_single, RunConfig, SolverKind, DEFAULT_TIME_LIMIT, TIME_LIMIT_ENV};
use farsa::FarsaError;
use farsa_core::{AlphaInit, AlphaUpdate, SolveOptions, Status};

#[derive(Parser)]
#[command(name = "farsa", version, about = "Group-sparse logistic regression experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance and write a report.
    Solve(SolveArgs),
    /// Run the 4 x 2 instance grid on every dataset in a directory.
    Grid(GridArgs),
    /// Compare two grid summaries instance by instance.
    Compare(CompareArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    Farsa,
    Pg,
}

impl From<SolverArg> for SolverKind {
    fn from(s: SolverArg) -> Self {
        match s {
            SolverArg::Farsa => SolverKind::Farsa,
            SolverArg::Pg => SolverKind::Pg,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum AlphaArg {
    Basic,
    Adaptive,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct SolverFlags {
    #[arg(long, value_enum, default_value = "farsa")]
    solver: SolverArg,
    /// Max-abs scale features after loading.
    #[arg(long)]
    scale: bool,
    /// Lower clamp of the logistic curvature weights.
    #[arg(long, default_value_t = farsa_core::losses::DEFAULT_DELTA)]
    delta: f64,
    /// Relative stopping tolerance.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Per-instance time limit in seconds.
    #[arg(long, env = TIME_LIMIT_ENV, default_value_t = DEFAULT_TIME_LIMIT)]
    time_limit: f64,
    #[arg(long, value_enum)]
    alpha_update: Option<AlphaArg>,
    /// Fixed initial PG parameter instead of the local estimate.
    #[arg(long)]
    alpha0: Option<f64>,
    /// Seed of the perturbation used to estimate the initial PG parameter.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    phi: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    /// Start with a small phi and switch to 1 once the PG measure is small.
    #[arg(long)]
    phi_switch: bool,
    /// Use kappa2 without the group-size rescaling.
    #[arg(long)]
    no_rescale: bool,
}

impl SolverFlags {
    fn options(&self) -> Result<SolveOptions, FarsaError> {
        let mut o = SolveOptions {
            max_seconds: self.time_limit,
            alpha_init: match self.alpha0 {
                Some(a) => AlphaInit::Fixed(a),
                None => AlphaInit::Estimate { seed: self.seed },
            },
            phi_switch: self.phi_switch,
            kappa2_rescale: !self.no_rescale,
            ..SolveOptions::default()
        };
        if let Some(t) = self.tol {
            o.tol_rel = t;
        }
        if let Some(m) = self.max_iter {
            o.max_iter = m;
        }
        if let Some(a) = self.alpha_update {
            o.alpha_update = match a {
                AlphaArg::Basic => AlphaUpdate::Basic,
                AlphaArg::Adaptive => AlphaUpdate::Adaptive,
            };
        }
        if let Some(p) = self.phi {
            o.phi = p;
        }
        if let Some(q) = self.q {
            o.q = q;
        }
        o.validate()?;
        Ok(o)
    }
}

#[derive(Args)]
struct SolveArgs {
    /// LIBSVM file, optionally gzip compressed.
    #[arg(long)]
    data: PathBuf,
    /// Number of groups as a fraction of the number of features.
    #[arg(long, default_value_t = 0.5)]
    fraction: f64,
    /// Lambda as a multiple of the smallest value giving a zero solution.
    #[arg(long, default_value_t = 0.1)]
    lambda_scale: f64,
    /// Declared number of features; inferred from the file when omitted.
    #[arg(long)]
    features: Option<usize>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Report destination; stdout when omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Per-iteration trace CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[command(flatten)]
    flags: SolverFlags,
}

#[derive(Args)]
struct GridArgs {
    /// Directory of LIBSVM files.
    dir: PathBuf,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Summary CSV destination; stdout when omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[command(flatten)]
    flags: SolverFlags,
}

#[derive(Args)]
struct CompareArgs {
    a: PathBuf,
    b: PathBuf,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

/// Usage and IO problems exit with 2, an unsolved instance with 1.
enum Failure {
    Usage(FarsaError),
    Unsolved(Status),
}

impl From<FarsaError> for Failure {
    fn from(e: FarsaError) -> Self {
        Failure::Usage(e)
    }
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, FarsaError> {
    match path {
        Some(p) => {
            let f = std::fs::File::create(p).map_err(|e| FarsaError::Io {
                path: p.to_path_buf(),
                source: e,
            })?;
            Ok(Box::new(std::io::BufWriter::new(f)))
        }
        None => Ok(Box::new(std::io::stdout().lock())),
    }
}

fn write_trace(path: &Path, out: &farsa::run::RunOutcome) -> Result<(), FarsaError> {
    let w = open_output(Some(path))?;
    write_trace_csv(&out.report.trace, w)
}

fn solve(args: SolveArgs) -> Result<(), Failure> {
    let options = args.flags.options()?;
    let solver = SolverKind::from(args.flags.solver);
    let cfg = RunConfig {
        data_path: args.data.clone(),
        scale: args.flags.scale,
        num_features: args.features,
        group_fraction: args.fraction,
        lambda_scale: args.lambda_scale,
        delta: args.flags.delta,
        solver,
        options,
    };
    let outcome = run_single(&cfg)?;
    if let Some(path) = &args.trace {
        write_trace(path, &outcome)?;
    }
    let mut out = open_output(args.output.as_deref())?;
    match args.format {
        Format::Json => {
            let seed = args.flags.alpha0.is_none().then_some(args.flags.seed);
            write_json(&RunSummary::new(&outcome, Some(&args.data), solver, seed), &mut out)?;
            writeln!(out).map_err(|e| FarsaError::Io {
                path: args.output.clone().unwrap_or_else(|| "<stdout>".into()),
                source: e,
            })?;
        }
        Format::Csv => {
            let r = &outcome.report;
            let row = GridRow {
                dataset: args.data.display().to_string(),
                group_fraction: args.fraction,
                lambda_scale: args.lambda_scale,
                solver,
                status: r.status.as_str().into(),
                seconds: outcome.elapsed_seconds,
                objective: r.objective_final,
                iterations: r.iterations,
                zero_groups: r.zero_groups,
                num_groups: outcome.info.num_groups,
                zero_pattern: String::new(),
                error: String::new(),
            };
            write_grid_csv(&[row], &mut out)?;
        }
    }
    drop(out);
    match outcome.report.status {
        Status::Optimal => Ok(()),
        s => Err(Failure::Unsolved(s)),
    }
}

fn grid(args: GridArgs) -> Result<(), Failure> {
    let cfg = GridConfig {
        solver: args.flags.solver.into(),
        options: args.flags.options()?,
        scale: args.flags.scale,
        delta: args.flags.delta,
        jobs: args.jobs,
    };
    let datasets = list_datasets(&args.dir)?;
    let rows = run_grid(&datasets, &cfg)?;
    write_grid_csv(&rows, open_output(args.output.as_deref())?)?;
    Ok(())
}

fn compare(args: CompareArgs) -> Result<(), Failure> {
    let a = read_grid_csv(&args.a)?;
    let b = read_grid_csv(&args.b)?;
    let rows = compare_grids(&a, &b)?;
    write_comparison_csv(&rows, open_output(args.output.as_deref())?)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(a) => solve(a),
        Command::Grid(a) => grid(a),
        Command::Compare(a) => compare(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Unsolved(s)) => {
            eprintln!("farsa: solver stopped with status {}", s.as_str());
            ExitCode::from(1)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("farsa: {e}");
            ExitCode::from(2)
        }
    }
}
