use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::math;
use crate::objective::{LinearOperator, SmoothLoss};
use crate::sparse::CsrMatrix;

/// Default floor on the per-sample curvature `sigma (1 - sigma)`.
pub const DEFAULT_DELTA: f64 = 1e-8;

/// Average logistic loss `(1/N) sum_i log(1 + exp(-y_i d_i^T x))` over the rows
/// `d_i` of a sparse design matrix with labels `y_i` in `{-1, +1}`.
///
/// The Hessian handed to the solver is `(1/N) D^T S D` with
/// `S_ii = max(sigma_i (1 - sigma_i), delta)`, which is positive definite on
/// any subspace where `D` has full column rank and `delta > 0`.
#[derive(Debug, Clone)]
pub struct LogisticLoss {
    data: CsrMatrix,
    // Column-compressed copy, kept when there are fewer features than samples.
    columns: Option<CsrMatrix>,
    labels: Vec<f64>,
    delta: f64,
    lipschitz: f64,
}

impl LogisticLoss {
    pub fn new(data: CsrMatrix, labels: Vec<f64>, delta: f64) -> crate::Result<Self> {
        if labels.len() != data.nrows() {
            return Err(Error::DimensionMismatch {
                expected: data.nrows(),
                found: labels.len(),
            });
        }
        if data.nrows() == 0 {
            return Err(Error::InvalidLoss("logistic loss needs at least one sample"));
        }
        if labels.iter().any(|&y| y != 1.0 && y != -1.0) {
            return Err(Error::InvalidLoss("labels must be -1 or +1"));
        }
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(Error::InvalidLoss("delta must be nonnegative"));
        }
        let n_samples = data.nrows() as f64;
        let lipschitz = data.frobenius_norm_sq() / (4.0 * n_samples);
        let columns = (data.ncols() < data.nrows()).then(|| data.transpose());
        Ok(Self {
            data,
            columns,
            labels,
            delta,
            lipschitz,
        })
    }

    pub fn data(&self) -> &CsrMatrix {
        &self.data
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn num_samples(&self) -> usize {
        self.data.nrows()
    }

    /// `t_i = y_i d_i^T x`
    pub fn margins(&self, x: &[f64]) -> Vec<f64> {
        (0..self.data.nrows())
            .map(|r| self.labels[r] * self.data.row_dot(r, x))
            .collect()
    }

    /// Diagonal of `S`: `max(sigma_i (1 - sigma_i), delta)` at `x`.
    pub fn curvature_weights(&self, x: &[f64]) -> Vec<f64> {
        self.margins(x)
            .into_iter()
            .map(|t| (sigmoid(t) * sigmoid(-t)).max(self.delta))
            .collect()
    }
}

/// `1 / (1 + exp(-z))` without overflow.
pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + math::exp(-z))
    } else {
        let e = math::exp(z);
        e / (1.0 + e)
    }
}

/// `log(1 + exp(-t))` without overflow.
pub(crate) fn log1p_exp_neg(t: f64) -> f64 {
    if t >= 0.0 {
        math::ln_1p(math::exp(-t))
    } else {
        -t + math::ln_1p(math::exp(t))
    }
}

/// `log1p_exp_neg(t + dt) - log1p_exp_neg(t) = log1p(sigma(-t) expm1(-dt))`;
/// the plain difference is used once `dt` is large enough not to cancel.
pub(crate) fn loss_change(t: f64, dt: f64) -> f64 {
    if dt.abs() <= 1.0 {
        math::ln_1p(sigmoid(-t) * math::exp_m1(-dt))
    } else {
        log1p_exp_neg(t + dt) - log1p_exp_neg(t)
    }
}

impl SmoothLoss for LogisticLoss {
    fn dim(&self) -> usize {
        self.data.ncols()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let total: f64 = self.margins(x).into_iter().map(log1p_exp_neg).sum();
        total / self.num_samples() as f64
    }

    fn gradient(&self, x: &[f64], grad: &mut [f64]) {
        self.value_and_gradient(x, grad);
    }

    fn value_and_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let inv_n = 1.0 / self.num_samples() as f64;
        let margins = self.margins(x);
        let value: f64 = margins.iter().map(|&t| log1p_exp_neg(t)).sum::<f64>() * inv_n;
        // 1 - sigma(t) = sigma(-t)
        let coef: Vec<f64> = margins
            .into_iter()
            .zip(&self.labels)
            .map(|(t, &y)| -y * sigmoid(-t) * inv_n)
            .collect();
        grad.iter_mut().for_each(|g| *g = 0.0);
        self.data.transpose_mul_acc(&coef, grad);
        value
    }

    fn value_change(&self, x: &[f64], y: &[f64]) -> f64 {
        let dx: Vec<f64> = y.iter().zip(x).map(|(a, b)| a - b).collect();
        let total: f64 = (0..self.data.nrows())
            .map(|r| {
                let t = self.labels[r] * self.data.row_dot(r, x);
                let dt = self.labels[r] * self.data.row_dot(r, &dx);
                loss_change(t, dt)
            })
            .sum();
        total / self.num_samples() as f64
    }

    fn reduced_hessian<'a>(&'a self, x: &[f64], coords: &[usize]) -> Box<dyn LinearOperator + 'a> {
        let inv_n = 1.0 / self.num_samples() as f64;
        let scaled: Vec<f64> = self
            .curvature_weights(x)
            .into_iter()
            .map(|w| w * inv_n)
            .collect();
        match &self.columns {
            Some(cols) => Box::new(ColumnHessian {
                cols,
                weights: scaled,
                coords: coords.to_vec(),
            }),
            None => {
                let mut position = vec![usize::MAX; self.data.ncols()];
                for (k, &c) in coords.iter().enumerate() {
                    position[c] = k;
                }
                Box::new(RowHessian {
                    rows: &self.data,
                    weights: scaled,
                    position,
                    dim: coords.len(),
                })
            }
        }
    }

    fn lipschitz_bound(&self) -> Option<f64> {
        Some(self.lipschitz)
    }
}

struct ColumnHessian<'a> {
    cols: &'a CsrMatrix,
    weights: Vec<f64>,
    coords: Vec<usize>,
}

impl LinearOperator for ColumnHessian<'_> {
    fn dim(&self) -> usize {
        self.coords.len()
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        let mut z = vec![0.0; self.weights.len()];
        for (&c, &vk) in self.coords.iter().zip(v) {
            if vk == 0.0 {
                continue;
            }
            let (rows, vals) = self.cols.row(c);
            for (&r, &d) in rows.iter().zip(vals) {
                z[r] += vk * d;
            }
        }
        for (zi, w) in z.iter_mut().zip(&self.weights) {
            *zi *= w;
        }
        for (o, &c) in out.iter_mut().zip(&self.coords) {
            *o = self.cols.row_dot(c, &z);
        }
    }
}

struct RowHessian<'a> {
    rows: &'a CsrMatrix,
    weights: Vec<f64>,
    position: Vec<usize>,
    dim: usize,
}

impl LinearOperator for RowHessian<'_> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (r, &w) in self.weights.iter().enumerate() {
            let (idx, val) = self.rows.row(r);
            let mut z = 0.0;
            for (&c, &d) in idx.iter().zip(val) {
                let k = self.position[c];
                if k != usize::MAX {
                    z += d * v[k];
                }
            }
            if z == 0.0 {
                continue;
            }
            z *= w;
            for (&c, &d) in idx.iter().zip(val) {
                let k = self.position[c];
                if k != usize::MAX {
                    out[k] += z * d;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> LogisticLoss {
        let d = CsrMatrix::from_dense(3, 2, &[1.0, 0.0, 0.5, -1.0, 0.0, 2.0]).unwrap();
        LogisticLoss::new(d, vec![1.0, -1.0, 1.0], DEFAULT_DELTA).unwrap()
    }

    #[test]
    fn value_at_zero_is_ln2() {
        let l = small();
        assert!((l.value(&[0.0, 0.0]) - core::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn single_sample_value() {
        let d = CsrMatrix::from_dense(1, 2, &[1.0, 0.0]).unwrap();
        let l = LogisticLoss::new(d, vec![1.0], 0.0).unwrap();
        for &t in &[-3.0, 0.5, 7.0] {
            let expected = libm::log(1.0 + libm::exp(-t));
            assert!((l.value(&[t, 0.0]) - expected).abs() < 1e-14);
        }
        assert!(l.value(&[1000.0, 0.0]).is_finite());
        assert!((l.value(&[-1000.0, 0.0]) - 1000.0).abs() < 1e-9);
        let mut g = [0.0; 2];
        l.gradient(&[-1000.0, 0.0], &mut g);
        assert!((g[0] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn gradient_at_zero() {
        let l = small();
        let mut g = [0.0; 2];
        l.gradient(&[0.0, 0.0], &mut g);
        // -(1/(2N)) sum y_i d_i
        let expected = [-(1.0 - 0.5 + 0.0) / 6.0, -(0.0 + 1.0 + 2.0) / 6.0];
        assert!((g[0] - expected[0]).abs() < 1e-15);
        assert!((g[1] - expected[1]).abs() < 1e-15);
    }

    #[test]
    fn weights_at_zero_are_quarter_and_clamp_saturated() {
        let l = small();
        assert!(l.curvature_weights(&[0.0, 0.0]).iter().all(|&w| w == 0.25));
        let d = CsrMatrix::from_dense(1, 1, &[1.0]).unwrap();
        let sat = LogisticLoss::new(d, vec![1.0], 1e-8).unwrap();
        assert_eq!(sat.curvature_weights(&[50.0]), vec![1e-8]);
    }

    #[test]
    fn row_and_column_paths_agree() {
        // 2 samples, 3 features: row path; transpose of the same data via a
        // 4-sample copy exercises the column path.
        let dense = [1.0, -2.0, 0.0, 0.3, 0.0, 1.5];
        let d = CsrMatrix::from_dense(2, 3, &dense).unwrap();
        let rows = LogisticLoss::new(d, vec![1.0, -1.0], 0.0).unwrap();
        assert!(rows.columns.is_none());
        let mut stacked = dense.to_vec();
        stacked.extend_from_slice(&dense);
        let d2 = CsrMatrix::from_dense(4, 3, &stacked).unwrap();
        let cols = LogisticLoss::new(d2, vec![1.0, -1.0, 1.0, -1.0], 0.0).unwrap();
        assert!(cols.columns.is_some());
        let x = [0.2, -0.1, 0.4];
        let coords = [0usize, 2];
        let v = [0.7, -1.3];
        let mut a = [0.0; 2];
        let mut b = [0.0; 2];
        rows.reduced_hessian(&x, &coords).apply(&v, &mut a);
        cols.reduced_hessian(&x, &coords).apply(&v, &mut b);
        for k in 0..2 {
            assert!((a[k] - b[k]).abs() < 1e-14, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn rejects_bad_labels() {
        let d = CsrMatrix::from_dense(1, 1, &[1.0]).unwrap();
        assert!(LogisticLoss::new(d.clone(), vec![0.0], 0.0).is_err());
        assert!(LogisticLoss::new(d, vec![1.0, 1.0], 0.0).is_err());
    }
}
