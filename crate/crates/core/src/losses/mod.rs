//! Concrete smooth losses.

mod logistic;
mod quadratic;

pub use logistic::{LogisticLoss, DEFAULT_DELTA};
pub use quadratic::QuadraticLoss;
