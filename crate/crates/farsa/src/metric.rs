//! Pairwise comparison of two solvers on one instance.

use serde::Serialize;

use crate::error::{FarsaError, Result};

/// Bar height used when only one side solved the instance.
pub const FAILURE_CLAMP: f64 = 10.0;
/// Objective values closer than this are a tie.
pub const OBJECTIVE_TIE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Timing {
    Solved(f64),
    Failed,
}

/// `-log2(time_a / time_b)`: positive when `a` is faster. A solved side
/// against a failed one gives `+-10`; two failures give `None`.
pub fn compare_metric(a: Timing, b: Timing) -> Result<Option<f64>> {
    for t in [a, b] {
        if let Timing::Solved(s) = t {
            if !(s > 0.0 && s.is_finite()) {
                return Err(FarsaError::InvalidArgument(format!(
                    "times must be positive, got {s}"
                )));
            }
        }
    }
    Ok(match (a, b) {
        (Timing::Solved(ta), Timing::Solved(tb)) => Some(-(ta / tb).log2()),
        (Timing::Solved(_), Timing::Failed) => Some(FAILURE_CLAMP),
        (Timing::Failed, Timing::Solved(_)) => Some(-FAILURE_CLAMP),
        (Timing::Failed, Timing::Failed) => None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Winner {
    A,
    B,
    Tie,
}

/// Lower objective wins when the gap exceeds [`OBJECTIVE_TIE`].
pub fn objective_winner(f_a: f64, f_b: f64) -> Winner {
    if f_b - f_a > OBJECTIVE_TIE {
        Winner::A
    } else if f_a - f_b > OBJECTIVE_TIE {
        Winner::B
    } else {
        Winner::Tie
    }
}

/// A side wins when its zero groups strictly contain the other's.
pub fn sparsity_winner(zeros_a: &[bool], zeros_b: &[bool]) -> Winner {
    assert_eq!(zeros_a.len(), zeros_b.len());
    let covers = |x: &[bool], y: &[bool]| x.iter().zip(y).all(|(&p, &q)| p || !q);
    let a_more = covers(zeros_a, zeros_b) && zeros_a.iter().zip(zeros_b).any(|(&p, &q)| p && !q);
    let b_more = covers(zeros_b, zeros_a) && zeros_b.iter().zip(zeros_a).any(|(&p, &q)| p && !q);
    match (a_more, b_more) {
        (true, _) => Winner::A,
        (_, true) => Winner::B,
        _ => Winner::Tie,
    }
}
