use core::fmt;

/// Errors raised by the solver and its building blocks.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Two objects that must share a dimension do not.
    DimensionMismatch { expected: usize, found: usize },
    /// The group structure is not a partition of `0..n` or a weight is not positive.
    InvalidPartition(&'static str),
    /// A gradient or Hessian of the regularizer was requested on a group whose block is zero.
    NotDifferentiable { group: usize },
    /// A curvature `v^T H v <= 0` was observed where a positive-definite operator is required.
    NonPositiveCurvature { curvature: f64 },
    /// A line search exceeded its backtracking cap.
    LineSearchFailure { backtracks: usize },
    /// An option is outside its admissible range.
    InvalidOption(&'static str),
    /// A non-finite value entered solver state.
    NonFinite(&'static str),
    /// Invalid input to a loss constructor.
    InvalidLoss(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::InvalidPartition(msg) => write!(f, "invalid group partition: {msg}"),
            Error::NotDifferentiable { group } => {
                write!(f, "regularizer is not differentiable on group {group} (zero block)")
            }
            Error::NonPositiveCurvature { curvature } => {
                write!(f, "operator is not positive definite (curvature {curvature:e})")
            }
            Error::LineSearchFailure { backtracks } => {
                write!(f, "line search failed after {backtracks} backtracks")
            }
            Error::InvalidOption(msg) => write!(f, "invalid option: {msg}"),
            Error::NonFinite(what) => write!(f, "non-finite value in {what}"),
            Error::InvalidLoss(msg) => write!(f, "invalid loss: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

pub(crate) fn check_dim(expected: usize, found: usize) -> crate::Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
