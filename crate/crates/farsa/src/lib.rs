//! Data loading, experiment plumbing, and reports around `farsa-core`.
//!
//! ```no_run
//! use farsa::run::{run_single, RunConfig, SolverKind};
//! use farsa_core::SolveOptions;
//!
//! let cfg = RunConfig {
//!     data_path: "a9a".into(),
//!     scale: false,
//!     num_features: None,
//!     group_fraction: 0.5,
//!     lambda_scale: 0.1,
//!     delta: 1e-8,
//!     solver: SolverKind::Farsa,
//!     options: SolveOptions::default(),
//! };
//! let out = run_single(&cfg)?;
//! println!("{} in {:.2}s", out.report.objective_final, out.elapsed_seconds);
//! # Ok::<(), farsa::FarsaError>(())
//! ```

pub mod dataset;
mod error;
pub mod grid;
pub mod instance;
pub mod metric;
pub mod report;
pub mod run;
pub mod synthetic;

pub use error::{FarsaError, Result};
