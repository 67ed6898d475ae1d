//! Dense and sparse matrix carriers plus the small factorizations the
//! solvers share.

mod sparse;
mod svd;

pub use sparse::SparseMatrix;
pub use svd::{pseudo_inverse, Svd};

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

pub type DenseMatrix = DMatrix<f64>;
pub type DenseVector = DVector<f64>;

/// Largest order for which dense eigendecompositions are attempted.
pub const DENSE_EIGEN_CAP: usize = 4000;

/// Solves `A X = B`, using Cholesky when `A` is symmetric and LU otherwise.
pub fn solve(a: &DenseMatrix, b: &DenseMatrix, what: &str) -> Result<DenseMatrix> {
    if a.nrows() != a.ncols() || a.nrows() != b.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "{what}: system {}x{} with right-hand side {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    if is_symmetric(a, 1e-12) {
        if let Some(chol) = a.clone().cholesky() {
            return Ok(chol.solve(b));
        }
    }
    a.clone()
        .lu()
        .solve(b)
        .filter(|x| x.iter().all(|v| v.is_finite()))
        .ok_or_else(|| Error::Singular(what.to_string()))
}

/// Solves a symmetric positive-definite system, failing if the matrix is not PD.
pub fn solve_spd(a: &DenseMatrix, b: &DenseMatrix, what: &str) -> Result<DenseMatrix> {
    if a.nrows() != a.ncols() || a.nrows() != b.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "{what}: system {}x{} with right-hand side {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    a.clone()
        .cholesky()
        .map(|c| c.solve(b))
        .ok_or_else(|| Error::NotPositiveDefinite(what.to_string()))
}

pub fn is_symmetric(a: &DenseMatrix, tol: f64) -> bool {
    if a.nrows() != a.ncols() {
        return false;
    }
    let scale = a.amax().max(1.0);
    for i in 0..a.nrows() {
        for j in (i + 1)..a.ncols() {
            if (a[(i, j)] - a[(j, i)]).abs() > tol * scale {
                return false;
            }
        }
    }
    true
}

/// Eigenvalues (ascending) and matching orthonormal eigenvectors of a dense
/// symmetric matrix.
pub fn symmetric_eigen(a: &DenseMatrix) -> Result<(Vec<f64>, DenseMatrix)> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "eigendecomposition of a {}x{} matrix",
            n,
            a.ncols()
        )));
    }
    if n > DENSE_EIGEN_CAP {
        return Err(Error::TooLarge {
            n,
            cap: DENSE_EIGEN_CAP,
        });
    }
    let sym = (a + a.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DenseMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(src).clone_owned();
        // Fix the sign so the largest-magnitude entry is positive.
        let pivot = col.iter().copied().fold(0.0_f64, |best, v| {
            if v.abs() > best.abs() + 1e-12 {
                v
            } else {
                best
            }
        });
        if pivot < 0.0 {
            col = -col;
        }
        vectors.set_column(dst, &col);
    }
    Ok((values, vectors))
}

/// Largest eigenvalue of a symmetric PSD matrix such as `AᵀA`, by power iteration.
pub fn psd_spectral_radius(a: &DenseMatrix, tol: f64, max_iter: usize) -> f64 {
    let n = a.nrows();
    if n == 0 {
        return 0.0;
    }
    let mut v = DenseVector::from_fn(n, |i, _| 1.0 + (i as f64 * 0.618_034).fract());
    v /= v.norm();
    let mut lambda = 0.0;
    for _ in 0..max_iter {
        let w = a * &v;
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        let next = v.dot(&w);
        v = w / norm;
        if (next - lambda).abs() <= tol * next.abs().max(1e-300) {
            lambda = next;
            break;
        }
        lambda = next;
    }
    // Rayleigh quotient underestimates; a final norm estimate is an upper-side check.
    let w = a * &v;
    lambda.max(w.norm())
}

pub fn frobenius(a: &DenseMatrix) -> f64 {
    a.norm()
}

pub fn nuclear_norm(a: &DenseMatrix) -> f64 {
    Svd::new(a).singular_values.iter().sum()
}

pub fn l1_norm(a: &DenseMatrix) -> f64 {
    a.iter().map(|v| v.abs()).sum()
}

/// Sum of column Euclidean norms.
pub fn l21_norm(a: &DenseMatrix) -> f64 {
    a.column_iter().map(|c| c.norm()).sum()
}

pub fn max_abs(a: &DenseMatrix) -> f64 {
    a.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}
