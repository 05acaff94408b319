use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::error::Error;
use crate::math;
use crate::objective::{LinearOperator, SmoothLoss};

/// `f(x) = 0.5 x^T A x - b^T x` with dense symmetric positive definite `A`.
///
/// Mostly a test loss: its Lipschitz constant and minimizers are known in
/// closed form.
#[derive(Debug, Clone)]
pub struct QuadraticLoss {
    a: Vec<f64>,
    b: Vec<f64>,
    n: usize,
    lipschitz: f64,
}

impl QuadraticLoss {
    /// `a` is row-major `n x n`. The Lipschitz bound defaults to the largest
    /// Gershgorin row sum, which is exact for diagonal `A`.
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> crate::Result<Self> {
        let n = b.len();
        if a.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: a.len(),
            });
        }
        if !math::all_finite(&a) || !math::all_finite(&b) {
            return Err(Error::NonFinite("quadratic data"));
        }
        for i in 0..n {
            for j in 0..i {
                let (u, l) = (a[i * n + j], a[j * n + i]);
                if (u - l).abs() > 1e-12 * (1.0 + u.abs().max(l.abs())) {
                    return Err(Error::InvalidLoss("matrix is not symmetric"));
                }
            }
        }
        if !cholesky_ok(&a, n) {
            return Err(Error::InvalidLoss("matrix is not positive definite"));
        }
        let lipschitz = (0..n)
            .map(|i| a[i * n..(i + 1) * n].iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max);
        Ok(Self { a, b, n, lipschitz })
    }

    /// `A = diag(d)`.
    pub fn diagonal(d: &[f64], b: Vec<f64>) -> crate::Result<Self> {
        let n = d.len();
        let mut a = alloc::vec![0.0; n * n];
        for (i, &di) in d.iter().enumerate() {
            a[i * n + i] = di;
        }
        Self::new(a, b)
    }

    /// Replaces the Lipschitz bound, e.g. with a known `lambda_max(A)`.
    pub fn with_lipschitz(mut self, l: f64) -> Self {
        self.lipschitz = l;
        self
    }

    pub fn matrix(&self) -> &[f64] {
        &self.a
    }

    pub fn rhs(&self) -> &[f64] {
        &self.b
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.a[i * self.n..(i + 1) * self.n]
    }
}

fn cholesky_ok(a: &[f64], n: usize) -> bool {
    let mut l = alloc::vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if s <= 0.0 {
                    return false;
                }
                l[i * n + i] = math::sqrt(s);
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    true
}

impl SmoothLoss for QuadraticLoss {
    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, x: &[f64]) -> f64 {
        let mut quad = 0.0;
        for i in 0..self.n {
            quad += x[i] * math::dot(self.row(i), x);
        }
        0.5 * quad - math::dot(&self.b, x)
    }

    fn gradient(&self, x: &[f64], grad: &mut [f64]) {
        for (i, g) in grad.iter_mut().enumerate() {
            *g = math::dot(self.row(i), x) - self.b[i];
        }
    }

    /// `(A x - b + A dx / 2)^T dx` with `dx = y - x`.
    fn value_change(&self, x: &[f64], y: &[f64]) -> f64 {
        let dx: Vec<f64> = y.iter().zip(x).map(|(a, b)| a - b).collect();
        (0..self.n)
            .map(|i| {
                let row = self.row(i);
                (math::dot(row, x) - self.b[i] + 0.5 * math::dot(row, &dx)) * dx[i]
            })
            .sum()
    }

    fn reduced_hessian<'a>(&'a self, _x: &[f64], coords: &[usize]) -> Box<dyn LinearOperator + 'a> {
        Box::new(SubMatrix {
            loss: self,
            coords: coords.to_vec(),
        })
    }

    fn lipschitz_bound(&self) -> Option<f64> {
        Some(self.lipschitz)
    }
}

struct SubMatrix<'a> {
    loss: &'a QuadraticLoss,
    coords: Vec<usize>,
}

impl LinearOperator for SubMatrix<'_> {
    fn dim(&self) -> usize {
        self.coords.len()
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        for (o, &i) in out.iter_mut().zip(&self.coords) {
            let row = self.loss.row(i);
            *o = self.coords.iter().zip(v).map(|(&j, &vj)| row[j] * vj).sum();
        }
    }
}
