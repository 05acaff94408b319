//! JSON run reports and per-iteration CSV traces.

use std::io::Write;
use std::path::Path;

use farsa_core::{Counters, Status, TraceRecord};
use serde::Serialize;

use crate::error::{FarsaError, Result};
use crate::instance::InstanceInfo;
use crate::run::{RunOutcome, SolverKind};

#[derive(Debug, Serialize)]
pub struct RunSummary<'a> {
    pub data: Option<&'a Path>,
    pub solver: SolverKind,
    pub seed: Option<u64>,
    pub instance: InstanceInfo,
    pub status: Status,
    pub objective: f64,
    pub objective_initial: f64,
    pub chi_final: f64,
    pub tolerance: f64,
    pub iterations: usize,
    pub zero_groups: usize,
    pub counters: Counters,
    pub alpha0: f64,
    pub alpha_final: f64,
    pub elapsed_seconds: f64,
    pub x: &'a [f64],
}

impl<'a> RunSummary<'a> {
    pub fn new(outcome: &'a RunOutcome, data: Option<&'a Path>, solver: SolverKind, seed: Option<u64>) -> Self {
        let r = &outcome.report;
        RunSummary {
            data,
            solver,
            seed,
            instance: outcome.info,
            status: r.status,
            objective: r.objective_final,
            objective_initial: r.objective_initial,
            chi_final: r.chi_final,
            tolerance: r.tolerance,
            iterations: r.iterations,
            zero_groups: r.zero_groups,
            counters: r.counters,
            alpha0: r.alpha0,
            alpha_final: r.alpha_final,
            elapsed_seconds: outcome.elapsed_seconds,
            x: &r.x_final,
        }
    }
}

pub fn write_json<T: Serialize, W: Write>(value: &T, out: W) -> Result<()> {
    serde_json::to_writer_pretty(out, value)?;
    Ok(())
}

pub fn write_json_file<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| FarsaError::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    write_json(value, &mut w)?;
    writeln!(w).map_err(|e| FarsaError::io(path, e))?;
    Ok(())
}

#[derive(Serialize)]
struct TraceRow {
    iter: usize,
    #[serde(rename = "type")]
    kind: &'static str,
    flag: &'static str,
    chi_cg: f64,
    chi_pg: f64,
    alpha: f64,
    objective: f64,
    zero_groups: usize,
    cg_iters: usize,
    backtracks: usize,
}

/// Columns `iter,type,flag,chi_cg,chi_pg,alpha,objective,zero_groups,cg_iters,backtracks`.
pub fn write_trace_csv<W: Write>(trace: &[TraceRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for t in trace {
        w.serialize(TraceRow {
            iter: t.iter,
            kind: t.kind.as_str(),
            flag: t.flag.as_str(),
            chi_cg: t.chi_cg,
            chi_pg: t.chi_pg,
            alpha: t.alpha,
            objective: t.objective,
            zero_groups: t.zero_groups,
            cg_iters: t.cg_iters,
            backtracks: t.backtracks,
        })?;
    }
    if trace.is_empty() {
        w.write_record([
            "iter", "type", "flag", "chi_cg", "chi_pg", "alpha", "objective", "zero_groups",
            "cg_iters", "backtracks",
        ])?;
    }
    w.flush().map_err(|e| FarsaError::io("<trace>", e))?;
    Ok(())
}
