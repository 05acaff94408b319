//! Group layout, weight calibration, and construction of test instances.

use farsa_core::{CompositeObjective, GroupPartition, LogisticLoss, SmoothLoss};
use serde::Serialize;

use crate::dataset::Dataset;
use crate::error::{FarsaError, Result};

/// Fractions of `n` used as group counts in the experiment grid.
pub const GROUP_FRACTIONS: [f64; 4] = [0.25, 0.5, 0.75, 1.0];
/// Multiples of `lambda_min` used in the experiment grid.
pub const LAMBDA_SCALES: [f64; 2] = [0.1, 0.01];

/// Splits `0..n` into `num_groups` contiguous groups of size `n / num_groups`,
/// with the remainder going to the last group. Weights are set to 1.
pub fn assign_groups(n: usize, num_groups: usize) -> Result<GroupPartition> {
    if num_groups == 0 || num_groups > n {
        return Err(FarsaError::InvalidArgument(format!(
            "number of groups must lie in [1, {n}], got {num_groups}"
        )));
    }
    let base = n / num_groups;
    let groups: Vec<Vec<usize>> = (0..num_groups)
        .map(|g| {
            let end = if g + 1 == num_groups { n } else { (g + 1) * base };
            (g * base..end).collect()
        })
        .collect();
    Ok(GroupPartition::new(groups, vec![1.0; num_groups])?)
}

/// `floor(fraction * n)`, at least 1.
pub fn group_count(n: usize, fraction: f64) -> usize {
    ((fraction * n as f64).floor() as usize).clamp(1, n.max(1))
}

/// Weights `sqrt(|G_i|)`.
pub fn sqrt_size_weights(partition: &GroupPartition) -> Vec<f64> {
    partition
        .groups()
        .iter()
        .map(|g| (g.len() as f64).sqrt())
        .collect()
}

/// Smallest `lambda` such that `x = 0` is optimal under weights
/// `lambda * sqrt(|G_i|)`: `max_i ||grad_{G_i} f(0)|| / sqrt(|G_i|)`.
pub fn lambda_min<L: SmoothLoss>(loss: &L, partition: &GroupPartition) -> f64 {
    let mut g = vec![0.0; loss.dim()];
    loss.gradient(&vec![0.0; loss.dim()], &mut g);
    (0..partition.num_groups())
        .map(|i| partition.block_norm(i, &g) / (partition.group(i).len() as f64).sqrt())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InstanceInfo {
    pub num_samples: usize,
    pub num_features: usize,
    pub num_groups: usize,
    pub group_fraction: f64,
    pub lambda_scale: f64,
    pub lambda_min: f64,
}

/// Logistic loss on `ds` with `floor(fraction * n)` groups and weights
/// `lambda_scale * lambda_min * sqrt(|G_i|)`. The dataset should already be
/// scaled and label-mapped.
pub fn build_instance(
    ds: &Dataset,
    group_fraction: f64,
    lambda_scale: f64,
    delta: f64,
) -> Result<(CompositeObjective<LogisticLoss>, InstanceInfo)> {
    if !(group_fraction > 0.0 && group_fraction <= 1.0) {
        return Err(FarsaError::InvalidArgument(format!(
            "group fraction must lie in (0, 1], got {group_fraction}"
        )));
    }
    if !(lambda_scale > 0.0 && lambda_scale.is_finite()) {
        return Err(FarsaError::InvalidArgument(format!(
            "lambda scale must be positive, got {lambda_scale}"
        )));
    }
    let n = ds.num_features();
    if n == 0 {
        return Err(FarsaError::UnsupportedDataset("dataset has no features".into()));
    }
    let num_groups = group_count(n, group_fraction);
    let partition = assign_groups(n, num_groups)?;
    let loss = LogisticLoss::new(ds.features.clone(), ds.labels.clone(), delta)?;
    let lmin = lambda_min(&loss, &partition);
    if lmin <= 0.0 {
        return Err(FarsaError::UnsupportedDataset(
            "gradient vanishes at zero; every weight scale gives x = 0".into(),
        ));
    }
    let weights = sqrt_size_weights(&partition)
        .into_iter()
        .map(|w| lambda_scale * lmin * w)
        .collect();
    let partition = partition.with_weights(weights)?;
    let info = InstanceInfo {
        num_samples: ds.num_samples(),
        num_features: n,
        num_groups,
        group_fraction,
        lambda_scale,
        lambda_min: lmin,
    };
    Ok((CompositeObjective::new(loss, partition)?, info))
}

#[cfg(test)]
mod tests {
    use super::*;
    use farsa_core::QuadraticLoss;

    #[test]
    fn worked_example_puts_remainder_last() {
        let p = assign_groups(10, 3).unwrap();
        assert_eq!(p.groups(), &[vec![0, 1, 2], vec![3, 4, 5], vec![6, 7, 8, 9]]);
        let p = assign_groups(4, 4).unwrap();
        assert!(p.groups().iter().all(|g| g.len() == 1));
        assert_eq!(assign_groups(5, 1).unwrap().groups(), &[vec![0, 1, 2, 3, 4]]);
        assert!(assign_groups(3, 0).is_err());
        assert!(assign_groups(3, 4).is_err());
    }

    #[test]
    fn group_counts_follow_floor() {
        assert_eq!(group_count(123, 0.25), 30);
        assert_eq!(group_count(123, 0.5), 61);
        assert_eq!(group_count(123, 1.0), 123);
        assert_eq!(group_count(2, 0.25), 1);
    }

    #[test]
    fn lambda_min_by_hand() {
        // f = 0.5||x||^2 - b^T x, grad f(0) = -b
        let q = QuadraticLoss::diagonal(&[1.0, 1.0], vec![0.0, 0.0]).unwrap();
        assert_eq!(lambda_min(&q, &assign_groups(2, 1).unwrap()), 0.0);
        let q = QuadraticLoss::diagonal(&[1.0, 1.0], vec![3.0, 4.0]).unwrap();
        let l = lambda_min(&q, &assign_groups(2, 1).unwrap());
        assert!((l - 5.0 / 2f64.sqrt()).abs() < 1e-15);
    }
}
