//! Tridiagonal LU with partial pivoting, and inverse iteration for
//! selected eigenvectors of a real symmetric tridiagonal matrix.

use crate::ensemble::{RngStream, StreamPath};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// LU factorization of a shifted tridiagonal `T - shift I` with row interchanges.
pub struct TridiagLu<S> {
    dl: Vec<S>,
    d: Vec<S>,
    du: Vec<S>,
    du2: Vec<S>,
    swapped: Vec<bool>,
}

impl<S: Scalar> TridiagLu<S> {
    /// Factors `T - shift` for `T = tridiag(e, d, e)`. Pivots smaller than
    /// `tiny` in magnitude are replaced by `tiny`, which keeps singular
    /// shifts (exact eigenvalues) usable for inverse iteration.
    pub fn new(d: &[f64], e: &[f64], shift: S, tiny: f64) -> Self {
        let n = d.len();
        let mut dd: Vec<S> = d.iter().map(|&x| S::from_re(x) - shift).collect();
        let mut dl: Vec<S> = e.iter().map(|&x| S::from_re(x)).collect();
        let mut du = dl.clone();
        let mut du2 = vec![S::ZERO; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if dd[i].abs() >= dl[i].abs() {
                if dd[i] != S::ZERO {
                    let fact = dl[i] / dd[i];
                    dl[i] = fact;
                    dd[i + 1] = dd[i + 1] - fact * du[i];
                } else {
                    dl[i] = S::ZERO;
                }
            } else {
                let fact = dd[i] / dl[i];
                dd[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = dd[i + 1];
                dd[i + 1] = temp - fact * dd[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swapped[i] = true;
            }
        }
        for x in dd.iter_mut() {
            if x.abs() < tiny {
                *x = if x.re() < 0.0 { S::from_re(-tiny) } else { S::from_re(tiny) };
            }
        }
        TridiagLu {
            dl,
            d: dd,
            du,
            du2,
            swapped,
        }
    }

    pub fn last_pivot(&self) -> S {
        *self.d.last().unwrap_or(&S::ZERO)
    }

    /// Solves in place.
    pub fn solve(&self, b: &mut [S]) {
        let n = self.d.len();
        if n == 0 {
            return;
        }
        for i in 0..n - 1 {
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            } else {
                b[i + 1] = b[i + 1] - self.dl[i] * b[i];
            }
        }
        b[n - 1] = b[n - 1] / self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}

const MAX_ITS: usize = 5;
const EXTRA: usize = 2;

/// Eigenvectors of `tridiag(e, d, e)` for the ascending `eigenvalues`.
///
/// Vectors whose eigenvalues lie within `1e-3 |T|_1` of their predecessor
/// form a cluster and are Gram-Schmidt orthogonalized against the earlier
/// members; starting vectors are fixed pseudo-random sequences.
pub fn inverse_iteration(d: &[f64], e: &[f64], eigenvalues: &[f64]) -> Result<Vec<Vec<f64>>> {
    let n = d.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    if n == 1 {
        return Ok(eigenvalues.iter().map(|_| vec![1.0]).collect());
    }
    let eps = f64::EPSILON;
    let mut onenrm = 0.0f64;
    for i in 0..n {
        let mut s = d[i].abs();
        if i > 0 {
            s += e[i - 1].abs();
        }
        if i + 1 < n {
            s += e[i].abs();
        }
        onenrm = onenrm.max(s);
    }
    if onenrm == 0.0 {
        // T = 0: any orthonormal set works
        return Ok(eigenvalues
            .iter()
            .enumerate()
            .map(|(k, _)| {
                let mut v = vec![0.0; n];
                v[k % n] = 1.0;
                v
            })
            .collect());
    }
    let ortol = 1e-3 * onenrm;
    let stpcrt = (0.1 / n as f64).sqrt();
    let tiny = eps * onenrm;

    let mut out: Vec<Vec<f64>> = Vec::with_capacity(eigenvalues.len());
    let mut cluster_start = 0usize;
    let mut prev = f64::NEG_INFINITY;
    for (j, &lambda) in eigenvalues.iter().enumerate() {
        let mut shift = lambda;
        if j > 0 {
            let pertol = 10.0 * (eps * shift).abs();
            if shift - prev < pertol {
                shift = prev + pertol;
            }
            if shift - prev > ortol {
                cluster_start = j;
            }
        }
        prev = shift;

        let lu = TridiagLu::<f64>::new(d, e, shift, tiny);
        let mut rng = RngStream::new(0x1157_e1f0_u64, StreamPath::synthetic(j as u64, n as u64));
        let mut b: Vec<f64> = (0..n).map(|_| 2.0 * rng.uniform() - 1.0).collect();

        let mut checks = 0;
        let mut its = 0;
        loop {
            its += 1;
            if its > MAX_ITS {
                return Err(Error::NonConvergence {
                    index: j,
                    iterations: MAX_ITS,
                });
            }
            let l1: f64 = b.iter().map(|x| x.abs()).sum();
            let scale = n as f64 * onenrm * eps.max(lu.last_pivot().abs()) / l1;
            for x in b.iter_mut() {
                *x *= scale;
            }
            lu.solve(&mut b);
            for z in &out[cluster_start..j] {
                let dot: f64 = z.iter().zip(&b).map(|(a, c)| a * c).sum();
                for (x, &zi) in b.iter_mut().zip(z) {
                    *x -= dot * zi;
                }
            }
            let nrm = b.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            if nrm < stpcrt {
                continue;
            }
            checks += 1;
            if checks > EXTRA {
                break;
            }
        }
        let norm = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        let jmax = b
            .iter()
            .enumerate()
            .fold((0, 0.0f64), |(bi, bv), (i, x)| if x.abs() > bv { (i, x.abs()) } else { (bi, bv) })
            .0;
        let inv = if b[jmax] < 0.0 { -1.0 / norm } else { 1.0 / norm };
        for x in b.iter_mut() {
            *x *= inv;
        }
        out.push(b);
    }
    Ok(out)
}
