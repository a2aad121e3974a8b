//! Small dense linear-algebra kernel: row-major matrices and a growable
//! lower-triangular Cholesky factor.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Lower-triangular factor `L` with `L Lᵀ = A`, stored as packed rows so it
/// can grow by one row at a time.
#[derive(Clone, Debug, Default)]
pub struct CholeskyFactor {
    // row i holds L[i][0..=i]
    packed: Vec<f64>,
    n: usize,
}

impl CholeskyFactor {
    pub fn new() -> Self {
        Self::default()
    }

    /// Factorizes a symmetric positive-definite matrix, adding `jitter` to the diagonal.
    pub fn factorize(a: &Matrix, jitter: f64) -> Result<Self> {
        let mut f = CholeskyFactor::new();
        let mut col = Vec::with_capacity(a.nrows());
        for i in 0..a.nrows() {
            col.clear();
            col.extend_from_slice(&a.row(i)[..i]);
            f.push(&col, a[(i, i)] + jitter)?;
        }
        Ok(f)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let start = i * (i + 1) / 2;
        &self.packed[start..start + i + 1]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j > i {
            0.0
        } else {
            self.row(i)[j]
        }
    }

    /// Solves `L v = b` in place.
    pub fn forward_solve_in_place(&self, b: &mut [f64]) {
        debug_assert_eq!(b.len(), self.n);
        for i in 0..self.n {
            let row = self.row(i);
            let mut s = b[i];
            for j in 0..i {
                s -= row[j] * b[j];
            }
            b[i] = s / row[i];
        }
    }

    pub fn forward_solve(&self, b: &[f64]) -> Vec<f64> {
        let mut v = b.to_vec();
        self.forward_solve_in_place(&mut v);
        v
    }

    /// Solves `Lᵀ x = b` in place.
    pub fn backward_solve_in_place(&self, b: &mut [f64]) {
        debug_assert_eq!(b.len(), self.n);
        for i in (0..self.n).rev() {
            b[i] /= self.row(i)[i];
            let bi = b[i];
            let row = self.row(i);
            for j in 0..i {
                b[j] -= row[j] * bi;
            }
        }
    }

    /// Solves `A x = b` where `A = L Lᵀ`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.forward_solve_in_place(&mut x);
        self.backward_solve_in_place(&mut x);
        x
    }

    /// Appends a row/column to the factored matrix.
    ///
    /// `cross` holds the new off-diagonal entries `A[n][0..n]`, `diag` the new
    /// diagonal entry. Returns the new row of `L` (the solved cross-covariance
    /// followed by the pivot).
    pub fn push(&mut self, cross: &[f64], diag: f64) -> Result<&[f64]> {
        let mut row = self.forward_solve(cross);
        let residual = diag - row.iter().map(|v| v * v).sum::<f64>();
        if !(residual > 0.0) || !residual.is_finite() {
            return Err(Error::NotPositiveDefinite {
                pivot: self.n,
                value: residual,
            });
        }
        row.push(residual.sqrt());
        self.push_row_unchecked(row);
        Ok(self.row(self.n - 1))
    }

    /// Appends an already-computed factor row (length `dim() + 1`).
    pub(crate) fn push_row_unchecked(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.n + 1);
        self.packed.extend(row);
        self.n += 1;
    }

    /// `log det(L Lᵀ)`.
    pub fn log_det(&self) -> f64 {
        2.0 * (0..self.n).map(|i| self.row(i)[i].ln()).sum::<f64>()
    }
}
