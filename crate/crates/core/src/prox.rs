//! Proximal-gradient update `T(x, alpha)` and step `s(x, alpha)`.
//!
//! For each group the update is a block soft-threshold of the gradient step
//! `u_i = x_i - alpha * grad_i f(x)`:
//!
//! ```text
//! T_i = max(1 - alpha * lambda_i / ||u_i||, 0) * u_i
//! ```
//!
//! Blocks with `||u_i|| <= alpha * lambda_i` (including `u_i = 0`) map to an
//! exact zero block.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_dim, Error};
use crate::group::GroupPartition;
use crate::math;
use crate::objective::{CompositeObjective, SmoothLoss};

/// `T(x, alpha)` for the composite objective.
pub fn prox_update<L: SmoothLoss>(
    x: &[f64],
    alpha: f64,
    obj: &CompositeObjective<L>,
) -> crate::Result<Vec<f64>> {
    check_dim(obj.dim(), x.len())?;
    check_alpha(alpha)?;
    let grad = obj.smooth_gradient(x);
    Ok(update_with_gradient(x, &grad, alpha, obj.partition()))
}

/// `s(x, alpha) = T(x, alpha) - x`.
pub fn prox_step<L: SmoothLoss>(
    x: &[f64],
    alpha: f64,
    obj: &CompositeObjective<L>,
) -> crate::Result<Vec<f64>> {
    check_dim(obj.dim(), x.len())?;
    check_alpha(alpha)?;
    let grad = obj.smooth_gradient(x);
    Ok(step_with_gradient(x, &grad, alpha, obj.partition()))
}

fn check_alpha(alpha: f64) -> crate::Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidOption("PG parameter must be positive and finite"))
    }
}

/// `T(x, alpha)` from a precomputed `grad f(x)`.
pub fn update_with_gradient(
    x: &[f64],
    grad: &[f64],
    alpha: f64,
    partition: &GroupPartition,
) -> Vec<f64> {
    let mut out = vec![0.0; x.len()];
    for (i, g) in partition.groups().iter().enumerate() {
        let norm_u = math::sqrt(
            g.iter()
                .map(|&j| {
                    let u = x[j] - alpha * grad[j];
                    u * u
                })
                .sum(),
        );
        let thresh = alpha * partition.weight(i);
        if norm_u <= thresh || norm_u == 0.0 {
            continue;
        }
        let factor = 1.0 - thresh / norm_u;
        for &j in g {
            out[j] = factor * (x[j] - alpha * grad[j]);
        }
    }
    out
}

/// `s(x, alpha)` from a precomputed `grad f(x)`.
pub fn step_with_gradient(
    x: &[f64],
    grad: &[f64],
    alpha: f64,
    partition: &GroupPartition,
) -> Vec<f64> {
    let mut s = update_with_gradient(x, grad, alpha, partition);
    for (sj, xj) in s.iter_mut().zip(x) {
        *sj -= xj;
    }
    s
}
