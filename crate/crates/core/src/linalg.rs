//! Small dense symmetric eigenvalue solver.
//!
//! Cyclic Jacobi rotations. Interaction graphs here have tens of nodes, so the
//! O(n^3) sweep cost is irrelevant and Jacobi gives eigenvalues to high
//! relative accuracy without a tridiagonal reduction.

use nalgebra::DMatrix;
use thiserror::Error;

/// Hard cap on full Jacobi sweeps. Quadratic convergence usually finishes in
/// well under ten.
pub const MAX_SWEEPS: usize = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EigenError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric (|a[{i}][{j}] - a[{j}][{i}]| = {gap:e})")]
    NotSymmetric { i: usize, j: usize, gap: f64 },
    #[error("Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal residual {residual:e})")]
    NoConvergence { sweeps: usize, residual: f64 },
}

/// Frobenius norm of the strictly off-diagonal part.
fn off_diagonal_norm(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += a[(i, j)] * a[(i, j)];
            }
        }
    }
    sum.sqrt()
}

/// Eigenvalues of a symmetric matrix in ascending order.
///
/// Iterates until the off-diagonal Frobenius norm drops below
/// `tol * max(1, ||A||_F)`.
pub fn symmetric_eigenvalues(matrix: &DMatrix<f64>, tol: f64) -> Result<Vec<f64>, EigenError> {
    symmetric_eigenvalues_with_cap(matrix, tol, MAX_SWEEPS)
}

/// As [`symmetric_eigenvalues`] with an explicit sweep cap.
pub fn symmetric_eigenvalues_with_cap(
    matrix: &DMatrix<f64>,
    tol: f64,
    max_sweeps: usize,
) -> Result<Vec<f64>, EigenError> {
    let n = matrix.nrows();
    if matrix.ncols() != n {
        return Err(EigenError::NotSquare {
            rows: n,
            cols: matrix.ncols(),
        });
    }
    let scale = matrix.norm().max(1.0);
    for i in 0..n {
        for j in (i + 1)..n {
            let gap = (matrix[(i, j)] - matrix[(j, i)]).abs();
            if gap > 1e-12 * scale {
                return Err(EigenError::NotSymmetric { i, j, gap });
            }
        }
    }

    let mut a = matrix.clone();
    let threshold = tol * scale;
    let mut sweeps = 0;
    let mut residual = off_diagonal_norm(&a);
    while residual > threshold {
        if sweeps == max_sweeps {
            return Err(EigenError::NoConvergence { sweeps, residual });
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                // Smaller root of t^2 + 2 t theta - 1 = 0.
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
        sweeps += 1;
        residual = off_diagonal_norm(&a);
    }

    let mut eigenvalues: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    eigenvalues.sort_by(f64::total_cmp);
    Ok(eigenvalues)
}
