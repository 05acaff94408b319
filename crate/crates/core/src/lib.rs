//! Reduced-space second-order solver for problems of the form
//!
//! ```text
//! minimize  f(x) + sum_i lambda_i * ||x[G_i]||_2
//! ```
//!
//! where `f` is smooth and convex and the groups `G_i` partition the
//! coordinates. Each iteration computes a proximal-gradient (PG) step, uses it
//! to split the groups into a second-order subspace (groups that look safely
//! nonzero) and a first-order subspace, and then either runs a Newton-CG step
//! with a projected line search on the first or a backtracking PG step on the
//! second. Groups that the projected search drives into a small ball around
//! zero are set exactly to zero, which is how the support is identified.
//!
//! The crate is `no_std` and only needs `alloc`. IO, data formats and the
//! command line front end live in the companion `farsa` crate.
//!
//! ```
//! use farsa_core::{solve, CompositeObjective, GroupPartition, QuadraticLoss, SolveOptions};
//!
//! // f(x) = 0.5 * ||x||^2 - b^T x with one group and lambda = 1.
//! let loss = QuadraticLoss::new(vec![1.0, 0.0, 0.0, 1.0], vec![3.0, 4.0]).unwrap();
//! let partition = GroupPartition::new(vec![vec![0, 1]], vec![1.0]).unwrap();
//! let obj = CompositeObjective::new(loss, partition).unwrap();
//! let report = solve(&obj, &[0.0, 0.0], &SolveOptions::default()).unwrap();
//! assert!((report.x_final[0] - 2.4).abs() < 1e-6);
//! assert!((report.x_final[1] - 3.2).abs() < 1e-6);
//! ```
#![no_std]

extern crate alloc;

pub mod decompose;
mod error;
pub mod group;
pub mod linesearch;
pub mod losses;
pub mod math;
pub mod objective;
pub mod prox;
pub mod regularizer;
pub mod solver;
pub mod sparse;
pub mod subspace;

pub use decompose::{decompose, DecompositionResult};
pub use error::Error;
pub use group::{GroupPartition, GroupSet};
pub use linesearch::{CgFlag, CgSearchResult, PgFlag, PgSearchResult};
pub use losses::{LogisticLoss, QuadraticLoss};
pub use objective::{CompositeObjective, IterateState, LinearOperator, SmoothLoss};
pub use prox::{prox_step, prox_update};
pub use solver::{
    solve, solve_baseline_pg, solve_baseline_pg_with_clock, solve_with_clock, AlphaInit, AlphaUpdate, Clock, Counters,
    IterKind, NoClock, SolveOptions, SolveReport, Status, StepFlag, TraceRecord,
};
pub use sparse::CsrMatrix;
pub use subspace::{CgOutcome, CgStop, ReducedSystem};

pub type Result<T> = core::result::Result<T, Error>;
