//! Small dense `f64` linear algebra for phase-space computations.
//!
//! Matrices here are at most a few dozen entries (bivectors on phase spaces
//! of dimension <= 4, Jacobians of a handful of invariants), so plain
//! Gauss-Jordan and one-sided Jacobi iterations are simpler and more than
//! accurate enough.

/// Inverts a square row-major matrix by Gauss-Jordan elimination with
/// partial pivoting. Returns `None` when the matrix is numerically singular.
pub fn invert(a: &[f64], n: usize) -> Option<Vec<f64>> {
    assert_eq!(a.len(), n * n);
    let mut m = a.to_vec();
    let mut inv: Vec<f64> = (0..n * n)
        .map(|k| if k / n == k % n { 1.0 } else { 0.0 })
        .collect();
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| m[i * n + col].abs().total_cmp(&m[j * n + col].abs()))
            .expect("nonempty range");
        let pivot = m[pivot_row * n + col];
        if pivot.abs() < 1e-300 || !pivot.is_finite() {
            return None;
        }
        if pivot_row != col {
            for k in 0..n {
                m.swap(col * n + k, pivot_row * n + k);
                inv.swap(col * n + k, pivot_row * n + k);
            }
        }
        let scale = 1.0 / m[col * n + col];
        for k in 0..n {
            m[col * n + k] *= scale;
            inv[col * n + k] *= scale;
        }
        for row in 0..n {
            if row != col {
                let factor = m[row * n + col];
                if factor != 0.0 {
                    for k in 0..n {
                        m[row * n + k] -= factor * m[col * n + k];
                        inv[row * n + k] -= factor * inv[col * n + k];
                    }
                }
            }
        }
    }
    Some(inv)
}

/// Determinant via LU with partial pivoting.
pub fn det(a: &[f64], n: usize) -> f64 {
    assert_eq!(a.len(), n * n);
    let mut m = a.to_vec();
    let mut sign = 1.0;
    let mut result = 1.0;
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| m[i * n + col].abs().total_cmp(&m[j * n + col].abs()))
            .expect("nonempty range");
        let pivot = m[pivot_row * n + col];
        if pivot == 0.0 {
            return 0.0;
        }
        if pivot_row != col {
            for k in 0..n {
                m.swap(col * n + k, pivot_row * n + k);
            }
            sign = -sign;
        }
        result *= m[col * n + col];
        for row in (col + 1)..n {
            let factor = m[row * n + col] / m[col * n + col];
            if factor != 0.0 {
                for k in col..n {
                    m[row * n + k] -= factor * m[col * n + k];
                }
            }
        }
    }
    sign * result
}

/// Singular values of an `nrows x ncols` row-major matrix, descending, via
/// one-sided Jacobi orthogonalization of the columns.
pub fn singular_values(a: &[f64], nrows: usize, ncols: usize) -> Vec<f64> {
    assert_eq!(a.len(), nrows * ncols);
    // Work on columns: u[j] is the j-th column.
    let mut u: Vec<Vec<f64>> = (0..ncols)
        .map(|j| (0..nrows).map(|i| a[i * ncols + j]).collect())
        .collect();
    let tol = 1e-14;
    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for p in 0..ncols {
            for q in (p + 1)..ncols {
                let alpha: f64 = u[p].iter().map(|x| x * x).sum();
                let beta: f64 = u[q].iter().map(|x| x * x).sum();
                let gamma: f64 = u[p].iter().zip(&u[q]).map(|(x, y)| x * y).sum();
                if gamma.abs() <= tol * (alpha * beta).sqrt().max(1e-300) {
                    continue;
                }
                off = off.max(gamma.abs());
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..nrows {
                    let up = u[p][i];
                    let uq = u[q][i];
                    u[p][i] = c * up - s * uq;
                    u[q][i] = s * up + c * uq;
                }
            }
        }
        if off == 0.0 {
            break;
        }
    }
    let mut sv: Vec<f64> = u
        .iter()
        .map(|col| col.iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}
