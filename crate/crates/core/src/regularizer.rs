//! The weighted group-l2 regularizer `r(x) = sum_i lambda_i ||x[G_i]||_2`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::group::{GroupPartition, GroupSet};
use crate::math;

pub fn regularizer_value(x: &[f64], partition: &GroupPartition) -> crate::Result<f64> {
    partition.check(x)?;
    Ok(value_unchecked(x, partition))
}

pub(crate) fn value_unchecked(x: &[f64], partition: &GroupPartition) -> f64 {
    (0..partition.num_groups())
        .map(|i| partition.weight(i) * partition.block_norm(i, x))
        .sum()
}

/// `r(y) - r(x)`, using `||y_i|| - ||x_i|| = (||y_i||^2 - ||x_i||^2) / (||y_i|| + ||x_i||)`
/// so that nearby points do not lose the difference to cancellation.
pub(crate) fn change_unchecked(x: &[f64], y: &[f64], partition: &GroupPartition) -> f64 {
    let mut total = 0.0;
    for (i, g) in partition.groups().iter().enumerate() {
        let (mut nx, mut ny, mut diff) = (0.0, 0.0, 0.0);
        for &j in g {
            nx += x[j] * x[j];
            ny += y[j] * y[j];
            diff += (y[j] - x[j]) * (y[j] + x[j]);
        }
        let denom = math::sqrt(nx) + math::sqrt(ny);
        if denom > 0.0 {
            total += partition.weight(i) * diff / denom;
        }
    }
    total
}

/// Gradient of `r` on the requested groups, `lambda_i x_i / ||x_i||`, written
/// into a full-length vector that is zero elsewhere.
pub fn regularizer_gradient_on(
    x: &[f64],
    groups: &GroupSet,
    partition: &GroupPartition,
) -> crate::Result<Vec<f64>> {
    partition.check(x)?;
    let mut out = vec![0.0; x.len()];
    for i in groups.iter() {
        let nrm = partition.block_norm(i, x);
        if nrm == 0.0 {
            return Err(Error::NotDifferentiable { group: i });
        }
        let scale = partition.weight(i) / nrm;
        for &j in partition.group(i) {
            out[j] = scale * x[j];
        }
    }
    Ok(out)
}

/// `out += lambda (v / ||x|| - x (x^T v) / ||x||^3)` for one group, with `x`
/// and `v` given as blocks. Caller guarantees `x != 0`.
pub(crate) fn add_hessian_block(lambda: f64, x: &[f64], v: &[f64], out: &mut [f64]) {
    let nrm = math::norm(x);
    let xv = math::dot(x, v);
    let a = lambda / nrm;
    let b = lambda * xv / (nrm * nrm * nrm);
    for ((o, &vi), &xi) in out.iter_mut().zip(v).zip(x) {
        *o += a * vi - b * xi;
    }
}
