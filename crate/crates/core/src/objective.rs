//! The smooth-loss contract and the composite objective `F = f + r`.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_dim, Error};
use crate::group::GroupPartition;
use crate::math;
use crate::prox;
use crate::regularizer;

/// A symmetric linear map on a reduced space.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    /// `out = H v`
    fn apply(&self, v: &[f64], out: &mut [f64]);
}

/// Contract for the smooth convex part `f` of the objective.
pub trait SmoothLoss {
    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> f64;

    /// Writes `grad f(x)` into `grad`.
    fn gradient(&self, x: &[f64], grad: &mut [f64]);

    /// `f(x)`, writing `grad f(x)` into `grad`. Override when the two share work.
    fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        self.gradient(x, grad);
        self.value(x)
    }

    /// `f(y) - f(x)`. The default subtracts two values; losses should
    /// override it with a form that stays accurate when `y` is close to `x`.
    fn value_change(&self, x: &[f64], y: &[f64]) -> f64 {
        self.value(y) - self.value(x)
    }

    /// A (possibly regularized) Hessian of `f` at `x` restricted to the rows
    /// and columns in `coords`, as a matrix-free operator on vectors of length
    /// `coords.len()`. Must be symmetric positive semidefinite.
    fn reduced_hessian<'a>(&'a self, x: &[f64], coords: &[usize]) -> Box<dyn LinearOperator + 'a>;

    /// An upper bound on the Lipschitz constant of `grad f`, when known.
    fn lipschitz_bound(&self) -> Option<f64> {
        None
    }
}

impl<L: SmoothLoss + ?Sized> SmoothLoss for &L {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        (**self).value(x)
    }
    fn gradient(&self, x: &[f64], grad: &mut [f64]) {
        (**self).gradient(x, grad)
    }
    fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        (**self).value_and_gradient(x, grad)
    }
    fn value_change(&self, x: &[f64], y: &[f64]) -> f64 {
        (**self).value_change(x, y)
    }
    fn reduced_hessian<'a>(&'a self, x: &[f64], coords: &[usize]) -> Box<dyn LinearOperator + 'a> {
        (**self).reduced_hessian(x, coords)
    }
    fn lipschitz_bound(&self) -> Option<f64> {
        (**self).lipschitz_bound()
    }
}

/// `F(x) = f(x) + sum_i lambda_i ||x[G_i]||_2`.
#[derive(Debug, Clone)]
pub struct CompositeObjective<L> {
    loss: L,
    partition: GroupPartition,
}

impl<L: SmoothLoss> CompositeObjective<L> {
    pub fn new(loss: L, partition: GroupPartition) -> crate::Result<Self> {
        check_dim(partition.dim(), loss.dim())?;
        Ok(Self { loss, partition })
    }

    pub fn dim(&self) -> usize {
        self.partition.dim()
    }

    pub fn loss(&self) -> &L {
        &self.loss
    }

    pub fn partition(&self) -> &GroupPartition {
        &self.partition
    }

    pub fn into_parts(self) -> (L, GroupPartition) {
        (self.loss, self.partition)
    }

    pub fn smooth_value(&self, x: &[f64]) -> f64 {
        self.loss.value(x)
    }

    pub fn regularizer_value(&self, x: &[f64]) -> f64 {
        regularizer::value_unchecked(x, &self.partition)
    }

    /// `f(x) + r(x)`
    pub fn value(&self, x: &[f64]) -> f64 {
        self.loss.value(x) + self.regularizer_value(x)
    }

    /// `(f(y) - f(x), F(y) - F(x))`, both free of cancellation when the loss
    /// overrides [`SmoothLoss::value_change`].
    pub fn value_change(&self, x: &[f64], y: &[f64]) -> (f64, f64) {
        let df = self.loss.value_change(x, y);
        (df, df + regularizer::change_unchecked(x, y, &self.partition))
    }

    pub fn smooth_gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim()];
        self.loss.gradient(x, &mut g);
        g
    }

    /// `||grad_{G_i}(f + r)(x)||_2` given `grad f(x)`; requires a nonzero block.
    pub(crate) fn group_gradient_norm(&self, i: usize, x: &[f64], grad_f: &[f64]) -> f64 {
        let g = self.partition.group(i);
        let xn = self.partition.block_norm(i, x);
        debug_assert!(xn > 0.0);
        let scale = self.partition.weight(i) / xn;
        math::sqrt(
            g.iter()
                .map(|&j| {
                    let v = grad_f[j] + scale * x[j];
                    v * v
                })
                .sum(),
        )
    }
}

/// Quantities shared by every stage of one outer iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct IterateState {
    pub x: Vec<f64>,
    /// PG parameter in `(0, 1]`.
    pub alpha: f64,
    pub grad_f: Vec<f64>,
    /// `s(x, alpha) = T(x, alpha) - x`
    pub pg_step: Vec<f64>,
    pub f_value: f64,
    /// `f(x) + r(x)`
    pub objective: f64,
}

impl IterateState {
    pub fn new<L: SmoothLoss>(
        obj: &CompositeObjective<L>,
        x: Vec<f64>,
        alpha: f64,
    ) -> crate::Result<Self> {
        check_dim(obj.dim(), x.len())?;
        if !math::all_finite(&x) {
            return Err(Error::NonFinite("iterate"));
        }
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidOption("alpha must lie in (0, 1]"));
        }
        let mut grad_f = vec![0.0; x.len()];
        let f_value = obj.loss().value_and_gradient(&x, &mut grad_f);
        if !math::all_finite(&grad_f) {
            return Err(Error::NonFinite("gradient"));
        }
        let pg_step = prox::step_with_gradient(&x, &grad_f, alpha, obj.partition());
        let objective = f_value + obj.regularizer_value(&x);
        Ok(Self {
            x,
            alpha,
            grad_f,
            pg_step,
            f_value,
            objective,
        })
    }

    /// Recomputes the PG step for a new `alpha` at the same point.
    pub fn set_alpha(&mut self, alpha: f64, partition: &GroupPartition) {
        self.alpha = alpha;
        self.pg_step = prox::step_with_gradient(&self.x, &self.grad_f, alpha, partition);
    }
}
