//! Seeded synthetic problems for tests, demos, and benchmarking.

use farsa_core::{CompositeObjective, CsrMatrix, GroupPartition, QuadraticLoss};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dataset::{Dataset, Provenance, Scaling};

/// Sparse two-class data: entries are standard normal with probability
/// `density`, labels are the sign of a linear model (weights vanish on about
/// half of the features) plus Gaussian noise of standard deviation `noise`.
/// Larger noise makes the classes overlap and the loss better conditioned.
/// Columns are max-abs scaled and both classes are always present.
pub fn logistic_dataset(
    num_samples: usize,
    num_features: usize,
    density: f64,
    noise: f64,
    seed: u64,
) -> Dataset {
    assert!(num_samples >= 2 && num_features >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let truth: Vec<f64> = (0..num_features)
        .map(|_| {
            if rng.random_bool(0.5) {
                StandardNormal.sample(&mut rng)
            } else {
                0.0
            }
        })
        .collect();
    let mut rows = Vec::with_capacity(num_samples);
    let mut labels = Vec::with_capacity(num_samples);
    for _ in 0..num_samples {
        let mut row = Vec::new();
        let eps: f64 = StandardNormal.sample(&mut rng);
        let mut margin = noise * eps;
        for (c, w) in truth.iter().enumerate() {
            if rng.random_bool(density) {
                let v: f64 = StandardNormal.sample(&mut rng);
                margin += v * w;
                row.push((c, v));
            }
        }
        rows.push(row);
        labels.push(if margin >= 0.0 { 1.0 } else { -1.0 });
    }
    if labels.iter().all(|&y| y == labels[0]) {
        labels[0] = -labels[0];
    }
    let features = CsrMatrix::from_rows(num_features, rows).expect("valid rows");
    let ds = Dataset {
        features,
        labels,
        provenance: Provenance {
            path: None,
            scaling: Scaling::None,
        },
    };
    crate::dataset::scale_features(&ds)
}

/// Strongly convex quadratic with a known group-sparse minimizer.
pub struct PlantedQuadratic {
    pub objective: CompositeObjective<QuadraticLoss>,
    pub solution: Vec<f64>,
    /// `true` for groups that are zero at the solution.
    pub zero_groups: Vec<bool>,
    /// Smallest eigenvalue bound used to build `A`.
    pub strong_convexity: f64,
}

/// `A = M^T M / m + mu I` with Gaussian `M`, contiguous groups of
/// `group_size`, and weights `lambda`. About half of the groups are active
/// at the planted solution. Inactive groups satisfy
/// `||grad_i f(x*)|| = (1 - margin) lambda`, so the solution is
/// nondegenerate with relative margin `margin`.
pub fn planted_quadratic(
    num_groups: usize,
    group_size: usize,
    lambda: f64,
    mu: f64,
    margin: f64,
    seed: u64,
) -> PlantedQuadratic {
    assert!(num_groups >= 2 && group_size >= 1 && (0.0..1.0).contains(&margin));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = num_groups * group_size;
    let m = 2 * n;
    let gauss: Vec<f64> = (0..m * n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..m).map(|k| gauss[k * n + i] * gauss[k * n + j]).sum::<f64>() / m as f64;
            a[i * n + j] = s;
            a[j * n + i] = s;
        }
        a[i * n + i] += mu;
    }

    let groups: Vec<Vec<usize>> = (0..num_groups)
        .map(|g| (g * group_size..(g + 1) * group_size).collect())
        .collect();
    let mut zero_groups: Vec<bool> = (0..num_groups).map(|_| rng.random_bool(0.5)).collect();
    // keep at least one active and one inactive group
    zero_groups[0] = false;
    zero_groups[num_groups - 1] = true;

    let mut x = vec![0.0; n];
    for (g, idx) in groups.iter().enumerate() {
        if zero_groups[g] {
            continue;
        }
        for &j in idx {
            let v: f64 = StandardNormal.sample(&mut rng);
            x[j] = v + v.signum();
        }
    }
    // grad f(x*) = A x* - b must equal -lambda x_i / ||x_i|| on active
    // groups and a vector of norm (1 - margin) lambda on inactive ones.
    let mut b: Vec<f64> = (0..n)
        .map(|i| (0..n).map(|j| a[i * n + j] * x[j]).sum())
        .collect();
    for (g, idx) in groups.iter().enumerate() {
        if zero_groups[g] {
            let v: Vec<f64> = idx.iter().map(|_| StandardNormal.sample(&mut rng)).collect();
            let vn = v.iter().map(|t| t * t).sum::<f64>().sqrt();
            for (&j, t) in idx.iter().zip(&v) {
                b[j] -= (1.0 - margin) * lambda * t / vn;
            }
        } else {
            let xn = idx.iter().map(|&j| x[j] * x[j]).sum::<f64>().sqrt();
            for &j in idx {
                b[j] += lambda * x[j] / xn;
            }
        }
    }

    let loss = QuadraticLoss::new(a, b).expect("positive definite by construction");
    let partition = GroupPartition::new(groups, vec![lambda; num_groups]).expect("valid groups");
    PlantedQuadratic {
        objective: CompositeObjective::new(loss, partition).expect("matching dimensions"),
        solution: x,
        zero_groups,
        strong_convexity: mu,
    }
}
