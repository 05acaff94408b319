//! Batch runs over the 4 x 2 instance grid of each dataset.

use std::path::{Path, PathBuf};

use farsa_core::{SolveOptions, Status};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{FarsaError, Result};
use crate::instance::{build_instance, GROUP_FRACTIONS, LAMBDA_SCALES};
use crate::metric::{compare_metric, objective_winner, sparsity_winner, Timing, Winner};
use crate::run::{load_dataset, solve_objective, SolverKind};

#[derive(Debug, Clone)]
pub struct GridConfig {
    pub solver: SolverKind,
    pub options: SolveOptions,
    pub scale: bool,
    pub delta: f64,
    pub jobs: usize,
}

/// One instance of the grid. `zero_pattern` has one `0`/`1` character per
/// group, `1` meaning the group is zero in the final iterate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub dataset: String,
    pub group_fraction: f64,
    pub lambda_scale: f64,
    pub solver: SolverKind,
    pub status: String,
    pub seconds: f64,
    pub objective: f64,
    pub iterations: usize,
    pub zero_groups: usize,
    pub num_groups: usize,
    pub zero_pattern: String,
    pub error: String,
}

impl GridRow {
    pub fn solved(&self) -> bool {
        self.status == Status::Optimal.as_str()
    }
}

/// Regular files in `dir`, sorted by name, skipping hidden ones.
pub fn list_datasets(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|e| FarsaError::io(dir, e))?;
    let mut paths = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| FarsaError::io(dir, e))?;
        let path = entry.path();
        let hidden = path
            .file_name()
            .and_then(|n| n.to_str())
            .is_some_and(|n| n.starts_with('.'));
        if path.is_file() && !hidden {
            paths.push(path);
        }
    }
    paths.sort();
    Ok(paths)
}

fn dataset_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn failed_row(dataset: &str, fraction: f64, scale: f64, solver: SolverKind, err: String) -> GridRow {
    GridRow {
        dataset: dataset.to_string(),
        group_fraction: fraction,
        lambda_scale: scale,
        solver,
        status: "error".into(),
        seconds: 0.0,
        objective: f64::NAN,
        iterations: 0,
        zero_groups: 0,
        num_groups: 0,
        zero_pattern: String::new(),
        error: err,
    }
}

fn run_instance(path: &Path, fraction: f64, scale: f64, cfg: &GridConfig) -> GridRow {
    let name = dataset_name(path);
    let result = load_dataset(path, cfg.scale, None)
        .and_then(|ds| build_instance(&ds, fraction, scale, cfg.delta))
        .and_then(|(obj, info)| {
            let (report, secs) = solve_objective(&obj, cfg.solver, &cfg.options)?;
            let pattern: String = obj
                .partition()
                .zero_pattern(&report.x_final)
                .into_iter()
                .map(|z| if z { '1' } else { '0' })
                .collect();
            Ok(GridRow {
                dataset: name.clone(),
                group_fraction: fraction,
                lambda_scale: scale,
                solver: cfg.solver,
                status: report.status.as_str().into(),
                seconds: secs,
                objective: report.objective_final,
                iterations: report.iterations,
                zero_groups: report.zero_groups,
                num_groups: info.num_groups,
                zero_pattern: pattern,
                error: String::new(),
            })
        });
    result.unwrap_or_else(|e| failed_row(&name, fraction, scale, cfg.solver, e.to_string()))
}

/// Runs every dataset at every (fraction, lambda scale) pair, at most
/// `cfg.jobs` instances at a time. Failures become rows with status `error`.
/// Rows come back in dataset, fraction, scale order.
pub fn run_grid(datasets: &[PathBuf], cfg: &GridConfig) -> Result<Vec<GridRow>> {
    let tasks: Vec<(&PathBuf, f64, f64)> = datasets
        .iter()
        .flat_map(|p| {
            GROUP_FRACTIONS
                .iter()
                .flat_map(move |&f| LAMBDA_SCALES.iter().map(move |&s| (p, f, s)))
        })
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs.max(1))
        .build()
        .map_err(|e| FarsaError::InvalidArgument(e.to_string()))?;
    Ok(pool.install(|| {
        tasks
            .par_iter()
            .map(|&(p, f, s)| run_instance(p, f, s, cfg))
            .collect()
    }))
}

const GRID_COLUMNS: [&str; 12] = [
    "dataset",
    "group_fraction",
    "lambda_scale",
    "solver",
    "status",
    "seconds",
    "objective",
    "iterations",
    "zero_groups",
    "num_groups",
    "zero_pattern",
    "error",
];

/// Writes one row per instance; an empty grid still gets the header.
pub fn write_grid_csv<W: std::io::Write>(rows: &[GridRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    if rows.is_empty() {
        w.write_record(GRID_COLUMNS)?;
    }
    w.flush().map_err(|e| FarsaError::io("<grid>", e))?;
    Ok(())
}

pub fn read_grid_csv(path: &Path) -> Result<Vec<GridRow>> {
    let mut r = csv::Reader::from_path(path)?;
    let rows = r.deserialize().collect::<std::result::Result<Vec<GridRow>, _>>()?;
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub dataset: String,
    pub group_fraction: f64,
    pub lambda_scale: f64,
    /// `-log2(t_a / t_b)`, empty when both failed.
    pub metric: Option<f64>,
    pub objective_winner: Option<Winner>,
    pub sparsity_winner: Option<Winner>,
}

/// Matches rows of two grids by (dataset, fraction, scale). Objective and
/// sparsity winners are only reported when both runs solved the instance.
pub fn compare_grids(a: &[GridRow], b: &[GridRow]) -> Result<Vec<ComparisonRow>> {
    let mut out = Vec::new();
    for ra in a {
        let Some(rb) = b.iter().find(|rb| {
            rb.dataset == ra.dataset
                && rb.group_fraction == ra.group_fraction
                && rb.lambda_scale == ra.lambda_scale
        }) else {
            continue;
        };
        let timing = |r: &GridRow| {
            if r.solved() {
                Timing::Solved(r.seconds.max(f64::MIN_POSITIVE))
            } else {
                Timing::Failed
            }
        };
        let both = ra.solved() && rb.solved();
        let zeros = |r: &GridRow| r.zero_pattern.chars().map(|c| c == '1').collect::<Vec<_>>();
        let sparsity = (both && ra.zero_pattern.len() == rb.zero_pattern.len())
            .then(|| sparsity_winner(&zeros(ra), &zeros(rb)));
        out.push(ComparisonRow {
            dataset: ra.dataset.clone(),
            group_fraction: ra.group_fraction,
            lambda_scale: ra.lambda_scale,
            metric: compare_metric(timing(ra), timing(rb))?,
            objective_winner: both.then(|| objective_winner(ra.objective, rb.objective)),
            sparsity_winner: sparsity,
        });
    }
    Ok(out)
}

pub fn write_comparison_csv<W: std::io::Write>(rows: &[ComparisonRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| FarsaError::io("<comparison>", e))?;
    Ok(())
}
