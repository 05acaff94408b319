//! Single solves from a data file.

use std::path::PathBuf;
use std::time::Instant;

use farsa_core::{
    solve_baseline_pg_with_clock, solve_with_clock, Clock, CompositeObjective, LogisticLoss,
    SolveOptions, SolveReport,
};
use serde::{Deserialize, Serialize};

use crate::dataset::{map_labels, read_libsvm, scale_features, Dataset};
use crate::error::Result;
use crate::instance::{build_instance, InstanceInfo};

/// Environment variable overriding the default per-instance time limit.
pub const TIME_LIMIT_ENV: &str = "FARSA_TIME_LIMIT";
pub const DEFAULT_TIME_LIMIT: f64 = 1000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Farsa,
    Pg,
}

impl SolverKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SolverKind::Farsa => "farsa",
            SolverKind::Pg => "pg",
        }
    }
}

/// Wall-clock time since construction.
pub struct StdClock(Instant);

impl StdClock {
    pub fn start() -> Self {
        StdClock(Instant::now())
    }
}

impl Clock for StdClock {
    fn elapsed_seconds(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub data_path: PathBuf,
    /// Max-abs scale the features after loading.
    pub scale: bool,
    pub num_features: Option<usize>,
    pub group_fraction: f64,
    pub lambda_scale: f64,
    pub delta: f64,
    pub solver: SolverKind,
    pub options: SolveOptions,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub info: InstanceInfo,
    pub report: SolveReport,
    pub elapsed_seconds: f64,
}

/// Loads, optionally scales, and label-maps a LIBSVM file.
pub fn load_dataset(path: &std::path::Path, scale: bool, num_features: Option<usize>) -> Result<Dataset> {
    let ds = read_libsvm(path, num_features)?;
    let ds = if scale { scale_features(&ds) } else { ds };
    map_labels(&ds)
}

/// Runs one solver on a prepared objective; the clock starts here.
pub fn solve_objective(
    obj: &CompositeObjective<LogisticLoss>,
    solver: SolverKind,
    options: &SolveOptions,
) -> Result<(SolveReport, f64)> {
    let clock = StdClock::start();
    let x0 = vec![0.0; obj.dim()];
    let report = match solver {
        SolverKind::Farsa => solve_with_clock(obj, &x0, options, &clock)?,
        SolverKind::Pg => solve_baseline_pg_with_clock(obj, &x0, options, &clock)?,
    };
    Ok((report, clock.elapsed_seconds()))
}

pub fn run_single(cfg: &RunConfig) -> Result<RunOutcome> {
    let ds = load_dataset(&cfg.data_path, cfg.scale, cfg.num_features)?;
    let (obj, info) = build_instance(&ds, cfg.group_fraction, cfg.lambda_scale, cfg.delta)?;
    let (report, elapsed_seconds) = solve_objective(&obj, cfg.solver, &cfg.options)?;
    Ok(RunOutcome {
        info,
        report,
        elapsed_seconds,
    })
}

/// `FARSA_TIME_LIMIT` when set to a positive number, else the default.
pub fn default_time_limit() -> f64 {
    std::env::var(TIME_LIMIT_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<f64>().ok())
        .filter(|&t| t > 0.0)
        .unwrap_or(DEFAULT_TIME_LIMIT)
}
