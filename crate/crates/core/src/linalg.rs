//! Minimal dense linear algebra: square matrices and a symmetric
//! eigensolver.
//!
//! The networks this crate targets are desk-scale (the examples run at
//! N <= 10, the dense path stays practical up to N of a couple thousand),
//! so a cyclic Jacobi eigensolver on a dense matrix is both simple and
//! accurate; there is no sparse path.

use alloc::vec;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float as _;

/// Dense square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Zero matrix of dimension `n x n`.
    pub fn zeros(n: usize) -> Self {
        Matrix { n, data: vec![0.0; n * n] }
    }

    /// Identity matrix.
    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    /// Dimension of the (square) matrix.
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Entry at row `i`, column `j`.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Set entry at row `i`, column `j`.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.n + j] = value;
    }

    /// Add `value` to entry `(i, j)`.
    #[inline]
    pub fn add_to(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.n + j] += value;
    }

    /// Row `i` as a slice.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// Matrix-vector product `y = A x`.
    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        for i in 0..self.n {
            let row = self.row(i);
            let mut acc = 0.0;
            for j in 0..self.n {
                acc += row[j] * x[j];
            }
            y[i] = acc;
        }
    }

    /// Frobenius norm.
    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Largest absolute asymmetry `max |a_ij - a_ji|`.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Symmetric part `(A + A^T) / 2`.
    pub fn symmetric_part(&self) -> Matrix {
        let mut s = Matrix::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                s.set(i, j, 0.5 * (self.get(i, j) + self.get(j, i)));
            }
        }
        s
    }
}

/// Failure of the dense eigensolver.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LinalgError {
    /// Input matrix is not symmetric within tolerance.
    #[error("matrix is not symmetric: max |a_ij - a_ji| = {max_asymmetry:e}")]
    NotSymmetric {
        /// Largest absolute entry asymmetry found.
        max_asymmetry: f64,
    },
    /// Jacobi iteration did not reach the off-diagonal threshold.
    #[error(
        "eigensolver did not converge after {sweeps} sweeps \
         (off-diagonal norm {off_diagonal:e}, matrix norm {matrix_norm:e})"
    )]
    NoConvergence {
        /// Number of full Jacobi sweeps performed.
        sweeps: usize,
        /// Remaining off-diagonal Frobenius norm.
        off_diagonal: f64,
        /// Frobenius norm of the input, for conditioning context.
        matrix_norm: f64,
    },
}

/// Eigendecomposition of a symmetric matrix.
///
/// `values` are ascending; column `k` of `vectors` is the eigenvector for
/// `values[k]`.
#[derive(Debug, Clone)]
pub struct SymEigen {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors, one per column.
    pub vectors: Matrix,
}

const MAX_SWEEPS: usize = 100;

/// Full eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// The input must be symmetric to within `1e-12 * ||A||_F` per entry.
pub fn sym_eigen(a: &Matrix) -> Result<SymEigen, LinalgError> {
    let n = a.dim();
    let scale = a.frobenius_norm();
    let asym = a.max_asymmetry();
    if asym > 1e-12 * scale.max(1.0) {
        return Err(LinalgError::NotSymmetric { max_asymmetry: asym });
    }

    let mut m = a.clone();
    let mut v = Matrix::identity(n);
    if n <= 1 {
        return Ok(sorted_eigen(m, v));
    }

    let tol = f64::EPSILON * scale.max(f64::MIN_POSITIVE);
    for _sweep in 0..MAX_SWEEPS {
        if off_diagonal_norm(&m) <= tol {
            return Ok(sorted_eigen(m, v));
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                rotate(&mut m, &mut v, p, q);
            }
        }
    }
    let off = off_diagonal_norm(&m);
    if off <= tol.max(1e-10 * scale) {
        // Close enough for spectra of well-conditioned symmetric matrices.
        return Ok(sorted_eigen(m, v));
    }
    Err(LinalgError::NoConvergence {
        sweeps: MAX_SWEEPS,
        off_diagonal: off,
        matrix_norm: scale,
    })
}

/// Ascending eigenvalues of a symmetric matrix.
pub fn sym_eigenvalues(a: &Matrix) -> Result<Vec<f64>, LinalgError> {
    sym_eigen(a).map(|e| e.values)
}

fn off_diagonal_norm(m: &Matrix) -> f64 {
    let n = m.dim();
    let mut acc = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let x = m.get(i, j);
            acc += 2.0 * x * x;
        }
    }
    acc.sqrt()
}

/// One Jacobi rotation zeroing entry `(p, q)`; accumulates into `v`.
fn rotate(m: &mut Matrix, v: &mut Matrix, p: usize, q: usize) {
    let apq = m.get(p, q);
    if apq == 0.0 {
        return;
    }
    let app = m.get(p, p);
    let aqq = m.get(q, q);
    // Skip rotations that cannot change anything at working precision.
    if apq.abs() <= f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
        m.set(p, q, 0.0);
        m.set(q, p, 0.0);
        return;
    }

    let tau = (aqq - app) / (2.0 * apq);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    let n = m.dim();
    for i in 0..n {
        if i != p && i != q {
            let aip = m.get(i, p);
            let aiq = m.get(i, q);
            m.set(i, p, c * aip - s * aiq);
            m.set(p, i, c * aip - s * aiq);
            m.set(i, q, s * aip + c * aiq);
            m.set(q, i, s * aip + c * aiq);
        }
    }
    m.set(p, p, c * c * app - 2.0 * s * c * apq + s * s * aqq);
    m.set(q, q, s * s * app + 2.0 * s * c * apq + c * c * aqq);
    m.set(p, q, 0.0);
    m.set(q, p, 0.0);

    for i in 0..n {
        let vip = v.get(i, p);
        let viq = v.get(i, q);
        v.set(i, p, c * vip - s * viq);
        v.set(i, q, s * vip + c * viq);
    }
}

fn sorted_eigen(m: Matrix, v: Matrix) -> SymEigen {
    let n = m.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m.get(i, i).total_cmp(&m.get(j, j)));

    let mut values = Vec::with_capacity(n);
    let mut vectors = Matrix::zeros(n);
    for (col, &idx) in order.iter().enumerate() {
        values.push(m.get(idx, idx));
        for row in 0..n {
            vectors.set(row, col, v.get(row, idx));
        }
    }
    SymEigen { values, vectors }
}

/// Euclidean norm of a vector.
pub fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Dot product.
pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}
