//! Direct linear solves of `(H - z) u = b`, kept as an independent check of
//! the eigendecomposition route.

use super::ComplexEnergy;
use crate::matrix::SymmetricMatrix;
use crate::scalar::Scalar;
use num_complex::Complex64;

/// LU factors of the shifted matrix `H - z` (partial pivoting).
pub struct ShiftedLu {
    n: usize,
    lu: Vec<Complex64>,
    perm: Vec<usize>,
}

impl ShiftedLu {
    pub fn new<T: Scalar>(h: &SymmetricMatrix<T>, z: ComplexEnergy) -> Self {
        let n = h.dim();
        // row-major working copy
        let mut lu = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                lu[i * n + j] = h.get(i, j).to_c64();
            }
            lu[i * n + i] -= z.as_complex();
        }
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let p = (k..n)
                .max_by(|&a, &b| lu[a * n + k].norm().total_cmp(&lu[b * n + k].norm()))
                .unwrap();
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let piv = lu[k * n + k];
            for i in k + 1..n {
                let f = lu[i * n + k] / piv;
                lu[i * n + k] = f;
                for j in k + 1..n {
                    let t = lu[k * n + j];
                    lu[i * n + j] -= f * t;
                }
            }
        }
        ShiftedLu { n, lu, perm }
    }

    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let t = x[j];
                x[i] -= self.lu[i * n + j] * t;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let t = x[j];
                x[i] -= self.lu[i * n + j] * t;
            }
            x[i] /= self.lu[i * n + i];
        }
        x
    }

    /// `(H - z)^{-1} delta_x`.
    pub fn column(&self, x: usize) -> Vec<Complex64> {
        let mut b = vec![Complex64::new(0.0, 0.0); self.n];
        b[x] = Complex64::new(1.0, 0.0);
        self.solve(&b)
    }
}

/// `dim^{-1} Im Tr (H - z)^{-1}` by `dim` linear solves.
pub fn nu_trace_direct<T: Scalar>(h: &SymmetricMatrix<T>, z: ComplexEnergy) -> f64 {
    let lu = ShiftedLu::new(h, z);
    let n = h.dim();
    (0..n).map(|x| lu.column(x)[x].im).sum::<f64>() / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_inverse() {
        // H = [[1, 2], [2, -1]], z = i: (H - z)^{-1} = (H - z)^adj / det
        let h = SymmetricMatrix::from_upper(2, |i, j| match (i, j) {
            (0, 0) => 1.0,
            (1, 1) => -1.0,
            _ => 2.0,
        });
        let z = ComplexEnergy::new(0.0, 1.0).unwrap();
        let lu = ShiftedLu::new(&h, z);
        let i = Complex64::new(0.0, 1.0);
        let det = (1.0 - i) * (-1.0 - i) - 4.0;
        let col = lu.column(0);
        assert!((col[0] - (-1.0 - i) / det).norm() < 1e-15);
        assert!((col[1] - (-2.0) / det).norm() < 1e-15);
        let expected = ((-1.0 - i) / det + (1.0 - i) / det).im / 2.0;
        assert!((nu_trace_direct(&h, z) - expected).abs() < 1e-15);
    }
}
