//! Symmetric eigendecomposition via cyclic Jacobi rotations.
//!
//! The solver is self-contained on purpose: the spectral augmentation only
//! needs full decompositions of modest symmetric matrices (one per dataset,
//! cached on disk), and owning the routine keeps results bit-reproducible
//! across platforms and dependency upgrades.
//!
//! Conventions: the input is symmetrized as `(M + Mᵀ)/2` before iterating;
//! eigenvalues are returned in ascending order; each eigenvector is scaled so
//! its first entry of significant magnitude is positive, which makes the
//! decomposition unique whenever the eigenvalues are distinct.

use crate::error::{Error, Result};
use crate::numerics::matrix::DenseMatrix;

/// Hard cap on Jacobi sweeps; well-conditioned inputs converge in ~6-12.
const MAX_SWEEPS: usize = 100;

/// Default convergence tolerance: iteration stops once the off-diagonal
/// Frobenius norm falls below `tol * ||M||_F`.
pub const DEFAULT_EIG_TOL: f64 = 1e-10;

/// Result of [`sym_eig`]: `eigenvalues[i]` pairs with column `i` of
/// `eigenvectors`.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DenseMatrix,
}

/// Full eigendecomposition of a symmetric matrix.
///
/// Near-symmetric input is accepted and averaged with its transpose first.
/// Fails with `NumericalFailure` (carrying the remaining off-diagonal
/// Frobenius norm) if the sweep cap is hit before reaching `tol`.
pub fn sym_eig(m: &DenseMatrix, tol: f64) -> Result<EigenDecomposition> {
    let n = m.rows();
    if m.cols() != n {
        return Err(Error::invalid(format!(
            "eigendecomposition requires a square matrix, got {}x{}",
            n,
            m.cols()
        )));
    }
    if !m.is_finite() {
        return Err(Error::invalid("eigendecomposition input has non-finite entries"));
    }
    if !tol.is_finite() || tol <= 0.0 {
        return Err(Error::invalid("eigensolver tolerance must be positive"));
    }

    // Working copy, symmetrized by averaging.
    let mut a = DenseMatrix::from_fn(n, n, |i, j| 0.5 * (m.get(i, j) + m.get(j, i)));
    let norm = a.frobenius_norm();
    // Eigenvector accumulator, stored transposed: row p of `vt` is the
    // current p-th vector, so rotations touch two contiguous rows.
    let mut vt = DenseMatrix::identity(n);

    if n <= 1 || norm == 0.0 {
        let eigenvalues = (0..n).map(|i| a.get(i, i)).collect();
        return Ok(sorted_decomposition(eigenvalues, vt));
    }

    let mut converged = false;
    for _sweep in 0..MAX_SWEEPS {
        let off = off_diagonal_norm(&a);
        if off <= tol * norm {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let app = a.get(p, p);
                let aqq = a.get(q, q);
                // Entries that can no longer affect the diagonal at f64
                // precision are flushed to zero instead of rotated.
                let g = 100.0 * apq.abs();
                if g <= f64::EPSILON * app.abs() && g <= f64::EPSILON * aqq.abs() {
                    a.set(p, q, 0.0);
                    a.set(q, p, 0.0);
                    continue;
                }
                let theta = 0.5 * (aqq - app) / apq;
                let t = if theta.abs() > 1e150 {
                    // Avoid overflow in theta^2; the limit of the exact
                    // formula for large |theta|.
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);

                // Rotate rows p and q of `a` (contiguous), then mirror into
                // the columns to keep the full matrix symmetric.
                rotate_rows(&mut a, p, q, s, tau);
                let new_pp = app - t * apq;
                let new_qq = aqq + t * apq;
                a.set(p, p, new_pp);
                a.set(q, q, new_qq);
                a.set(p, q, 0.0);
                a.set(q, p, 0.0);
                for j in 0..n {
                    if j != p && j != q {
                        let vp = a.get(p, j);
                        let vq = a.get(q, j);
                        a.set(j, p, vp);
                        a.set(j, q, vq);
                    }
                }
                rotate_rows(&mut vt, p, q, s, tau);
            }
        }
    }

    if !converged {
        let off = off_diagonal_norm(&a);
        if off > tol * norm {
            return Err(Error::numerical(
                format!("jacobi eigensolver did not converge within {MAX_SWEEPS} sweeps"),
                Some(off),
            ));
        }
    }

    let eigenvalues = (0..n).map(|i| a.get(i, i)).collect();
    Ok(sorted_decomposition(eigenvalues, vt))
}

/// Applies the Jacobi rotation to full rows `p` and `q`, including the
/// diagonal/pivot entries (the caller overwrites those afterwards).
fn rotate_rows(m: &mut DenseMatrix, p: usize, q: usize, s: f64, tau: f64) {
    let n = m.cols();
    debug_assert!(p < q);
    // Split borrow: row p lives before row q in the backing buffer.
    let (head, tail) = m.data_mut().split_at_mut(q * n);
    let row_p = &mut head[p * n..(p + 1) * n];
    let row_q = &mut tail[..n];
    for j in 0..n {
        let g = row_p[j];
        let h = row_q[j];
        row_p[j] = g - s * (h + g * tau);
        row_q[j] = h + s * (g - h * tau);
    }
}

fn off_diagonal_norm(a: &DenseMatrix) -> f64 {
    let n = a.rows();
    let mut sum = 0.0;
    for p in 0..n {
        for q in p + 1..n {
            let x = a.get(p, q);
            sum += 2.0 * x * x;
        }
    }
    sum.sqrt()
}

/// Sorts eigenpairs ascending by value and fixes each vector's sign so its
/// first entry with magnitude above `1e-12 * max|entry|` is positive.
fn sorted_decomposition(eigenvalues: Vec<f64>, vt: DenseMatrix) -> EigenDecomposition {
    let n = eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eigenvalues[i].partial_cmp(&eigenvalues[j]).unwrap());

    let mut values = Vec::with_capacity(n);
    let mut vectors = DenseMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        values.push(eigenvalues[src]);
        let row = vt.row(src);
        let scale = row.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
        let sign = row
            .iter()
            .find(|x| x.abs() > 1e-12 * scale)
            .map_or(1.0, |x| x.signum());
        for (i, &v) in row.iter().enumerate() {
            vectors.set(i, dst, sign * v);
        }
    }
    EigenDecomposition {
        eigenvalues: values,
        eigenvectors: vectors,
    }
}
