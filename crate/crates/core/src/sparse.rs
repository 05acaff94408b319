//! Compressed sparse row matrix used for the logistic-regression design matrix.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from raw CSR arrays. Column indices must be in range and strictly
    /// increasing within each row.
    pub fn new(
        nrows: usize,
        ncols: usize,
        indptr: Vec<usize>,
        indices: Vec<usize>,
        values: Vec<f64>,
    ) -> crate::Result<Self> {
        if indptr.len() != nrows + 1 || indptr[0] != 0 {
            return Err(Error::InvalidLoss("indptr must have nrows + 1 entries starting at 0"));
        }
        if indices.len() != values.len() || *indptr.last().unwrap() != indices.len() {
            return Err(Error::InvalidLoss("indptr, indices and values disagree"));
        }
        for r in 0..nrows {
            let (lo, hi) = (indptr[r], indptr[r + 1]);
            if lo > hi {
                return Err(Error::InvalidLoss("indptr must be non-decreasing"));
            }
            let row = &indices[lo..hi];
            if row.iter().any(|&c| c >= ncols) {
                return Err(Error::InvalidLoss("column index out of range"));
            }
            if row.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidLoss("column indices must be strictly increasing"));
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("matrix entries"));
        }
        Ok(Self {
            nrows,
            ncols,
            indptr,
            indices,
            values,
        })
    }

    /// Builds from per-row `(column, value)` lists; rows are sorted by column.
    pub fn from_rows(ncols: usize, rows: Vec<Vec<(usize, f64)>>) -> crate::Result<Self> {
        let nrows = rows.len();
        let mut indptr = Vec::with_capacity(nrows + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            for (c, v) in row {
                indices.push(c);
                values.push(v);
            }
            indptr.push(indices.len());
        }
        Self::new(nrows, ncols, indptr, indices, values)
    }

    /// Dense row-major input; explicit zeros are dropped.
    pub fn from_dense(nrows: usize, ncols: usize, data: &[f64]) -> crate::Result<Self> {
        if data.len() != nrows * ncols {
            return Err(Error::DimensionMismatch {
                expected: nrows * ncols,
                found: data.len(),
            });
        }
        let rows = (0..nrows)
            .map(|r| {
                (0..ncols)
                    .filter_map(|c| {
                        let v = data[r * ncols + c];
                        (v != 0.0).then_some((c, v))
                    })
                    .collect()
            })
            .collect();
        Self::from_rows(ncols, rows)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let (lo, hi) = (self.indptr[r], self.indptr[r + 1]);
        (&self.indices[lo..hi], &self.values[lo..hi])
    }

    pub fn row_dot(&self, r: usize, x: &[f64]) -> f64 {
        let (idx, val) = self.row(r);
        idx.iter().zip(val).map(|(&c, &v)| v * x[c]).sum()
    }

    /// `out = A x`
    pub fn mul_vec(&self, x: &[f64], out: &mut [f64]) {
        for (r, o) in out.iter_mut().enumerate().take(self.nrows) {
            *o = self.row_dot(r, x);
        }
    }

    /// `out += A^T w`
    pub fn transpose_mul_acc(&self, w: &[f64], out: &mut [f64]) {
        for (r, &wr) in w.iter().enumerate().take(self.nrows) {
            if wr == 0.0 {
                continue;
            }
            let (idx, val) = self.row(r);
            for (&c, &v) in idx.iter().zip(val) {
                out[c] += wr * v;
            }
        }
    }

    /// `A^T` in CSR form, i.e. `A` in compressed column form.
    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.ncols + 1];
        for &c in &self.indices {
            counts[c + 1] += 1;
        }
        for c in 0..self.ncols {
            counts[c + 1] += counts[c];
        }
        let indptr = counts.clone();
        let mut next = counts;
        let mut indices = vec![0; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for r in 0..self.nrows {
            let (idx, val) = self.row(r);
            for (&c, &v) in idx.iter().zip(val) {
                let pos = next[c];
                indices[pos] = r;
                values[pos] = v;
                next[c] += 1;
            }
        }
        Self {
            nrows: self.ncols,
            ncols: self.nrows,
            indptr,
            indices,
            values,
        }
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    pub fn indptr(&self) -> &[usize] {
        &self.indptr
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}
