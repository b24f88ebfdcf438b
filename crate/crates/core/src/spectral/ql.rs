//! Implicit-shift QL iteration for real symmetric tridiagonal matrices.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Iteration cap per eigenvalue.
pub const MAX_SWEEPS: usize = 30;

/// Diagonalizes the tridiagonal `(d, e)` in place; `e[i]` couples `i` and
/// `i + 1`. On return `d` holds the (unsorted) eigenvalues. When `z` is
/// given (an `n x n` column-major matrix, typically `Q`), the plane
/// rotations are applied to its columns, so `z` ends up holding the
/// eigenvectors of `Q T Q^H`.
///
/// The rotations applied to `d` and `e` do not depend on `z`, so the
/// eigenvalues are bitwise identical with and without vectors.
pub fn ql_implicit<T: Scalar>(d: &mut [f64], e_in: &[f64], mut z: Option<&mut [T]>) -> Result<()> {
    let n = d.len();
    if n <= 1 {
        return Ok(());
    }
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(&e_in[..n - 1]);

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_SWEEPS {
                return Err(Error::NonConvergence {
                    index: l,
                    iterations: iter - 1,
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0f64, 1.0f64, 0.0f64);
            let mut early = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    early = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_deref_mut() {
                    rotate_columns(z, n, i, c, s);
                }
            }
            if early {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

#[inline]
fn rotate_columns<T: Scalar>(z: &mut [T], n: usize, i: usize, c: f64, s: f64) {
    let (left, right) = z.split_at_mut((i + 1) * n);
    let zi = &mut left[i * n..];
    let zi1 = &mut right[..n];
    for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
        let f = *b;
        *b = a.scale(s) + f.scale(c);
        *a = a.scale(c) - f.scale(s);
    }
}

/// Ascending order of `d` (ties keep their position).
pub fn ascending_order(d: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..d.len()).collect();
    idx.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    idx
}
