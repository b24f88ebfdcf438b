//! Blocked Householder reduction of a Hermitian matrix to real symmetric
//! tridiagonal form, `A = Q T Q^H`.
//!
//! Lower-triangle formulation: panels of `PANEL` columns are reduced with
//! the matrix-vector products folded into an auxiliary block `W`, then the
//! trailing matrix receives one rank-`2 PANEL` update `A -= V W^H + W V^H`.
//! The reflectors `H_k = I - tau_k u_k u_k^H` are kept in the reduced matrix
//! (column `k`, rows `k+1..`, with `u_k[k+1] = 1`) so `Q` can be applied to
//! vectors later without forming it.

use crate::matrix::SymmetricMatrix;
use crate::scalar::Scalar;
use num_complex::Complex64;

const PANEL: usize = 32;
const ROW_TILE: usize = 128;
const COL_TILE: usize = 64;

pub struct Tridiagonal<T> {
    n: usize,
    diag: Vec<f64>,
    offdiag: Vec<f64>,
    reflectors: Vec<T>,
    tau: Vec<T>,
}

/// Elementary reflector: returns `(beta, tau)` with `H^H (alpha, x) = (beta, 0)`,
/// `beta` real; `x` is overwritten by the tail of `u`.
fn householder<T: Scalar>(alpha: T, x: &mut [T]) -> (f64, T) {
    let xnorm2: f64 = x.iter().map(|v| v.abs2()).sum();
    if xnorm2 == 0.0 && alpha.im() == 0.0 {
        return (alpha.re(), T::ZERO);
    }
    let norm = (alpha.abs2() + xnorm2).sqrt();
    let beta = if alpha.re() >= 0.0 { -norm } else { norm };
    let tau = (T::from_re(beta) - alpha).scale(1.0 / beta);
    let inv = T::ONE / (alpha - T::from_re(beta));
    for v in x.iter_mut() {
        *v = *v * inv;
    }
    (beta, tau)
}

/// `sum conj(a_k) v_k` and `y += alpha a` in one pass.
#[inline]
fn axpy_dotc<T: Scalar>(a: &[T], alpha: T, y: &mut [T], v: &[T]) -> T {
    let mut acc = [T::ZERO; 8];
    let mut ac = a.chunks_exact(8);
    let mut yc = y.chunks_exact_mut(8);
    let mut vc = v.chunks_exact(8);
    for ((a8, y8), v8) in (&mut ac).zip(&mut yc).zip(&mut vc) {
        for l in 0..8 {
            y8[l] += a8[l] * alpha;
            acc[l] += a8[l].conj() * v8[l];
        }
    }
    for ((a1, y1), v1) in ac
        .remainder()
        .iter()
        .zip(yc.into_remainder())
        .zip(vc.remainder())
    {
        *y1 += *a1 * alpha;
        acc[0] += a1.conj() * *v1;
    }
    let s0 = (acc[0] + acc[4]) + (acc[2] + acc[6]);
    let s1 = (acc[1] + acc[5]) + (acc[3] + acc[7]);
    s0 + s1
}

/// `sum conj(a_k) b_k` with a fixed lane order.
#[inline]
pub(crate) fn dotc<T: Scalar>(a: &[T], b: &[T]) -> T {
    let mut acc = [T::ZERO; 8];
    let mut ac = a.chunks_exact(8);
    let mut bc = b.chunks_exact(8);
    for (a8, b8) in (&mut ac).zip(&mut bc) {
        for l in 0..8 {
            acc[l] += a8[l].conj() * b8[l];
        }
    }
    for (a1, b1) in ac.remainder().iter().zip(bc.remainder()) {
        acc[0] += a1.conj() * *b1;
    }
    let s0 = (acc[0] + acc[4]) + (acc[2] + acc[6]);
    let s1 = (acc[1] + acc[5]) + (acc[3] + acc[7]);
    s0 + s1
}

#[inline]
fn axpy<T: Scalar>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += xi * alpha;
    }
}

/// `y = A[s.., s..] v`, reading only the lower triangle of the trailing block.
fn hemv_lower<T: Scalar>(a: &[T], n: usize, s: usize, v: &[T], y: &mut [T]) {
    y.fill(T::ZERO);
    for jj in 0..n - s {
        let j = s + jj;
        let col = &a[j * n + j..(j + 1) * n];
        let vj = v[jj];
        let (yh, yt) = y.split_at_mut(jj + 1);
        let dot = axpy_dotc(&col[1..], vj, yt, &v[jj + 1..]);
        yh[jj] += vj.scale(col[0].re()) + dot;
    }
}

impl<T: Scalar> Tridiagonal<T> {
    /// Reduces `matrix` (consumed) to tridiagonal form.
    pub fn new(matrix: SymmetricMatrix<T>) -> Self {
        let n = matrix.dim();
        let mut a = matrix.into_data();
        let mut diag = vec![0.0; n];
        let mut offdiag = vec![0.0; n.saturating_sub(1)];
        let mut tau = vec![T::ZERO; n.saturating_sub(1)];
        let mut w = vec![T::ZERO; n * PANEL.min(n.max(1))];

        let mut k0 = 0;
        while k0 < n {
            let kb = PANEL.min(n - k0);
            reduce_panel(&mut a, n, k0, kb, &mut w, &mut diag, &mut offdiag, &mut tau);
            let s = k0 + kb;
            if s < n {
                trailing_update(&mut a, n, k0, kb, &w);
            }
            k0 = s;
        }
        Tridiagonal {
            n,
            diag,
            offdiag,
            reflectors: a,
            tau,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn offdiag(&self) -> &[f64] {
        &self.offdiag
    }

    #[inline]
    fn reflector(&self, k: usize) -> (&[T], T) {
        let n = self.n;
        (&self.reflectors[k * n + k + 1..(k + 1) * n], self.tau[k])
    }

    /// `x <- Q x`.
    pub fn apply_q(&self, x: &mut [T]) {
        for k in (0..self.n.saturating_sub(1)).rev() {
            let (u, tau) = self.reflector(k);
            if tau == T::ZERO {
                continue;
            }
            let seg = &mut x[k + 1..];
            let s = dotc(u, seg) * tau;
            axpy(-s, u, seg);
        }
    }

    /// `x <- Q x` for a batch of vectors sharing one pass over the reflectors.
    pub fn apply_q_batch(&self, xs: &mut [Vec<T>]) {
        for k in (0..self.n.saturating_sub(1)).rev() {
            let (u, tau) = self.reflector(k);
            if tau == T::ZERO {
                continue;
            }
            for x in xs.iter_mut() {
                let seg = &mut x[k + 1..];
                let s = dotc(u, seg) * tau;
                axpy(-s, u, seg);
            }
        }
    }

    /// `x <- Q x` for complex vectors (used by resolvent columns).
    pub fn apply_q_c64(&self, x: &mut [Complex64]) {
        for k in (0..self.n.saturating_sub(1)).rev() {
            let (u, tau) = self.reflector(k);
            if tau == T::ZERO {
                continue;
            }
            let seg = &mut x[k + 1..];
            let mut s = Complex64::new(0.0, 0.0);
            for (ui, xi) in u.iter().zip(seg.iter()) {
                s += ui.to_c64().conj() * xi;
            }
            s *= tau.to_c64();
            for (ui, xi) in u.iter().zip(seg.iter_mut()) {
                *xi -= ui.to_c64() * s;
            }
        }
    }

    /// `x <- Q^H x` for complex vectors.
    pub fn apply_qh_c64(&self, x: &mut [Complex64]) {
        for k in 0..self.n.saturating_sub(1) {
            let (u, tau) = self.reflector(k);
            if tau == T::ZERO {
                continue;
            }
            let seg = &mut x[k + 1..];
            let mut s = Complex64::new(0.0, 0.0);
            for (ui, xi) in u.iter().zip(seg.iter()) {
                s += ui.to_c64().conj() * xi;
            }
            s *= tau.to_c64().conj();
            for (ui, xi) in u.iter().zip(seg.iter_mut()) {
                *xi -= ui.to_c64() * s;
            }
        }
    }

    /// Forms `Q` explicitly (column-major) by backward accumulation.
    pub fn form_q(&self) -> Vec<T> {
        let n = self.n;
        let mut q = vec![T::ZERO; n * n];
        for i in 0..n {
            q[i * n + i] = T::ONE;
        }
        for k in (0..n.saturating_sub(1)).rev() {
            let (u, tau) = self.reflector(k);
            if tau == T::ZERO {
                continue;
            }
            for j in k + 1..n {
                let seg = &mut q[j * n + k + 1..(j + 1) * n];
                let s = dotc(u, seg) * tau;
                axpy(-s, u, seg);
            }
        }
        q
    }
}

#[allow(clippy::too_many_arguments)]
fn reduce_panel<T: Scalar>(
    a: &mut [T],
    n: usize,
    k0: usize,
    kb: usize,
    w: &mut [T],
    diag: &mut [f64],
    offdiag: &mut [f64],
    tau: &mut [T],
) {
    let mut tmp = vec![T::ZERO; kb];
    for ii in 0..kb {
        let i = k0 + ii;
        // bring column i up to date with the reflectors already in this panel
        {
            let (left, right) = a.split_at_mut(i * n);
            let coli = &mut right[i..n];
            for jj in 0..ii {
                let vcol = &left[(k0 + jj) * n + i..(k0 + jj + 1) * n];
                let wcol = &w[jj * n + i..(jj + 1) * n];
                let cw = wcol[0].conj();
                let cv = vcol[0].conj();
                for ((x, &v), &ww) in coli.iter_mut().zip(vcol).zip(wcol) {
                    *x -= v * cw + ww * cv;
                }
            }
        }
        let dii = a[i * n + i].re();
        a[i * n + i] = T::from_re(dii);
        diag[i] = dii;
        if i + 1 >= n {
            continue;
        }

        let alpha = a[i * n + i + 1];
        let (beta, t) = householder(alpha, &mut a[i * n + i + 2..(i + 1) * n]);
        offdiag[i] = beta;
        tau[i] = t;
        a[i * n + i + 1] = T::ONE;

        let (wprev, wrest) = w.split_at_mut(ii * n);
        let wi = &mut wrest[i + 1..n];
        let v = &a[i * n + i + 1..(i + 1) * n];
        hemv_lower(a, n, i + 1, v, wi);

        if ii > 0 {
            // wi -= V (W^H v) + W (V^H v) over the earlier panel reflectors
            for jj in 0..ii {
                tmp[jj] = dotc(&wprev[jj * n + i + 1..(jj + 1) * n], v);
            }
            for jj in 0..ii {
                let vcol = &a[(k0 + jj) * n + i + 1..(k0 + jj + 1) * n];
                axpy(-tmp[jj], vcol, wi);
            }
            for jj in 0..ii {
                tmp[jj] = dotc(&a[(k0 + jj) * n + i + 1..(k0 + jj + 1) * n], v);
            }
            for jj in 0..ii {
                let wcol = &wprev[jj * n + i + 1..(jj + 1) * n];
                axpy(-tmp[jj], wcol, wi);
            }
        }
        for x in wi.iter_mut() {
            *x = *x * t;
        }
        let alpha = -(t * dotc(wi, v)).scale(0.5);
        axpy(alpha, v, wi);
    }
}

/// `A[s.., s..] -= V W^H + W V^H` on the lower triangle, `s = k0 + kb`.
fn trailing_update<T: Scalar>(a: &mut [T], n: usize, k0: usize, kb: usize, w: &[T]) {
    let s = k0 + kb;
    let (left, right) = a.split_at_mut(s * n);
    let mut cw = vec![T::ZERO; kb];
    let mut cv = vec![T::ZERO; kb];
    let mut jc = s;
    while jc < n {
        let jend = (jc + COL_TILE).min(n);
        let mut r0 = jc;
        while r0 < n {
            let r1 = (r0 + ROW_TILE).min(n);
            for j in jc..jend {
                let lo = r0.max(j);
                if lo >= r1 {
                    continue;
                }
                for kk in 0..kb {
                    cw[kk] = w[kk * n + j].conj();
                    cv[kk] = left[(k0 + kk) * n + j].conj();
                }
                let acol = &mut right[(j - s) * n + lo..(j - s) * n + r1];
                for kk in 0..kb {
                    let vcol = &left[(k0 + kk) * n + lo..(k0 + kk) * n + r1];
                    let wcol = &w[kk * n + lo..kk * n + r1];
                    let (a1, a2) = (cw[kk], cv[kk]);
                    for ((x, &v), &ww) in acol.iter_mut().zip(vcol).zip(wcol) {
                        *x -= v * a1 + ww * a2;
                    }
                }
            }
            r0 = r1;
        }
        jc = jend;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_hermitian<T: Scalar>(n: usize, seed: u64, f: impl Fn(&mut crate::ensemble::RngStream) -> T) -> SymmetricMatrix<T> {
        let mut s = crate::ensemble::RngStream::new(seed, crate::ensemble::StreamPath::synthetic(0, 0));
        SymmetricMatrix::from_upper(n, |_, _| f(&mut s))
    }

    fn check_reduction<T: Scalar>(h: &SymmetricMatrix<T>) -> f64 {
        let n = h.dim();
        let tri = Tridiagonal::new(h.clone());
        let q = tri.form_q();
        // max |Q T Q^H - H|
        let mut err = 0.0f64;
        for j in 0..n {
            // column j of T Q^H = T * conj(Q[j, :])^T
            let qh: Vec<T> = (0..n).map(|k| q[k * n + j].conj()).collect();
            let mut tq = vec![T::ZERO; n];
            for k in 0..n {
                let mut v = qh[k].scale(tri.diag[k]);
                if k > 0 {
                    v += qh[k - 1].scale(tri.offdiag[k - 1]);
                }
                if k + 1 < n {
                    v += qh[k + 1].scale(tri.offdiag[k]);
                }
                tq[k] = v;
            }
            for i in 0..n {
                let mut acc = T::ZERO;
                for k in 0..n {
                    acc += q[k * n + i] * tq[k];
                }
                err = err.max((acc - h.get(i, j)).abs());
            }
        }
        err
    }

    #[test]
    fn reconstructs_real_matrices_across_panel_boundaries() {
        for &n in &[1usize, 2, 3, 31, 32, 33, 70] {
            let h = random_hermitian(n, n as u64, |s| s.gaussian());
            let err = check_reduction(&h);
            assert!(err < 1e-12 * n as f64, "n={n} err={err}");
        }
    }

    #[test]
    fn reconstructs_complex_matrices() {
        for &n in &[1usize, 2, 5, 40, 67] {
            let h = random_hermitian(n, 10 + n as u64, |s| Complex64::new(s.gaussian(), s.gaussian()));
            let err = check_reduction(&h);
            assert!(err < 1e-12 * n as f64, "n={n} err={err}");
        }
    }

    #[test]
    fn q_and_qh_are_inverse() {
        let n = 45;
        let h = random_hermitian(n, 3, |s| Complex64::new(s.gaussian(), s.gaussian()));
        let tri = Tridiagonal::new(h);
        let x0: Vec<Complex64> = (0..n).map(|i| Complex64::new(i as f64, 1.0 / (i + 1) as f64)).collect();
        let mut x = x0.clone();
        tri.apply_qh_c64(&mut x);
        tri.apply_q_c64(&mut x);
        for (a, b) in x.iter().zip(&x0) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn block_diagonal_input_splits_exactly() {
        let mut h = SymmetricMatrix::<f64>::zeros(8);
        let b1 = random_hermitian(4, 1, |s| s.gaussian());
        let b2 = random_hermitian(4, 2, |s| s.gaussian());
        h.set_block(0, &b1);
        h.set_block(4, &b2);
        let tri = Tridiagonal::new(h);
        assert_eq!(tri.offdiag()[3], 0.0);
    }
}
