//! Dense Hermitian eigensolver and resolvent functionals.
//!
//! [`eigh`] reduces to tridiagonal form ([`tridiag`]), runs implicit QL
//! ([`ql`]) and, for full eigenvector sets, accumulates the rotations into
//! `Q`. [`eigh_selected`] instead computes only the requested eigenvectors by
//! inverse iteration on the tridiagonal matrix followed by one pass of the
//! stored reflectors, which keeps large windows-of-interest cheap.

pub mod direct;
pub mod invit;
pub mod ql;
pub mod tridiag;

use crate::ensemble::EnsembleParams;
use crate::error::{Error, Result};
use crate::hierarchy::HierarchyIndex;
use crate::matrix::SymmetricMatrix;
use crate::scalar::Scalar;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
pub use tridiag::Tridiagonal;

/// Largest supported dimension.
pub const MAX_DIM: usize = 1 << 13;

/// Provenance of a spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumMeta {
    pub params: EnsembleParams,
    pub trial: u64,
    pub m: u32,
}

/// Eigenvectors for a subset of eigenvalue indices, stored column by column.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenVectors<T> {
    dim: usize,
    indices: Vec<usize>,
    data: Vec<T>,
}

impl<T: Scalar> EigenVectors<T> {
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn column(&self, k: usize) -> &[T] {
        &self.data[k * self.dim..(k + 1) * self.dim]
    }
}

/// Ascending eigenvalues, optionally with orthonormal eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum<T> {
    eigenvalues: Vec<f64>,
    vectors: Option<EigenVectors<T>>,
    pub meta: Option<SpectrumMeta>,
}

impl<T: Scalar> Spectrum<T> {
    /// Eigenvalues only; sorts its input.
    pub fn from_eigenvalues(mut eigenvalues: Vec<f64>) -> Self {
        eigenvalues.sort_by(f64::total_cmp);
        Spectrum {
            eigenvalues,
            vectors: None,
            meta: None,
        }
    }

    pub fn with_meta(mut self, meta: SpectrumMeta) -> Self {
        self.meta = Some(meta);
        self
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn into_eigenvalues(self) -> Vec<f64> {
        self.eigenvalues
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn vectors(&self) -> Option<&EigenVectors<T>> {
        self.vectors.as_ref()
    }

    pub fn has_all_vectors(&self) -> bool {
        self.vectors
            .as_ref()
            .is_some_and(|v| v.indices.len() == self.eigenvalues.len())
    }

    /// Eigenvector paired with eigenvalue `j`, if it was computed.
    pub fn vector(&self, j: usize) -> Option<&[T]> {
        let v = self.vectors.as_ref()?;
        let k = v.indices.binary_search(&j).ok()?;
        Some(v.column(k))
    }

    /// Indices of eigenvalues in the closed interval `[lo, hi]`.
    pub fn indices_in(&self, lo: f64, hi: f64) -> std::ops::Range<usize> {
        let a = self.eigenvalues.partition_point(|&x| x < lo);
        let b = self.eigenvalues.partition_point(|&x| x <= hi);
        a..b.max(a)
    }

    /// Worst orthonormality defect `max |V^H V - I|` and residual
    /// `max |H V - V Lambda|` over the stored vectors.
    pub fn defects(&self, matrix: &SymmetricMatrix<T>) -> (f64, f64) {
        let Some(v) = self.vectors.as_ref() else {
            return (0.0, 0.0);
        };
        let k = v.indices.len();
        let mut orth = 0.0f64;
        for a in 0..k {
            for b in 0..=a {
                let dot = tridiag::dotc(v.column(a), v.column(b));
                let target = if a == b { 1.0 } else { 0.0 };
                orth = orth.max((dot - T::from_re(target)).abs());
            }
        }
        let mut resid = 0.0f64;
        for (col, &j) in v.indices.iter().enumerate() {
            let x = v.column(col);
            let hx = matrix.matvec(x);
            let l = self.eigenvalues[j];
            for (a, b) in hx.iter().zip(x) {
                resid = resid.max((*a - b.scale(l)).abs());
            }
        }
        (orth, resid)
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim > MAX_DIM {
        return Err(Error::out_of_range("dimension", dim as i64, 0, MAX_DIM as i64));
    }
    Ok(())
}

fn sorted(d: &[f64]) -> (Vec<usize>, Vec<f64>) {
    let order = ql::ascending_order(d);
    let vals = order.iter().map(|&i| d[i]).collect();
    (order, vals)
}

/// Full eigendecomposition; with `want_vectors` every eigenvector is returned.
pub fn eigh<T: Scalar>(matrix: SymmetricMatrix<T>, want_vectors: bool) -> Result<Spectrum<T>> {
    check_dim(matrix.dim())?;
    let tri = Tridiagonal::new(matrix);
    if !want_vectors {
        return Ok(Spectrum::from_eigenvalues(tri.eigenvalues()?));
    }
    let n = tri.dim();
    let mut z = tri.form_q();
    let mut d = tri.diag().to_vec();
    ql::ql_implicit(&mut d, tri.offdiag(), Some(&mut z))?;
    let (order, eigenvalues) = sorted(&d);
    let mut data = Vec::with_capacity(n * n);
    for &k in &order {
        data.extend_from_slice(&z[k * n..(k + 1) * n]);
    }
    Ok(Spectrum {
        eigenvalues,
        vectors: Some(EigenVectors {
            dim: n,
            indices: (0..n).collect(),
            data,
        }),
        meta: None,
    })
}

/// All eigenvalues plus the eigenvectors whose indices `select` picks from
/// the ascending eigenvalue list.
pub fn eigh_selected<T: Scalar>(
    matrix: SymmetricMatrix<T>,
    select: impl FnOnce(&[f64]) -> Vec<usize>,
) -> Result<Spectrum<T>> {
    let f = Factorization::new(matrix)?;
    let idx = select(f.eigenvalues());
    f.spectrum(&idx)
}

/// A tridiagonalized matrix together with its sorted eigenvalues; serves
/// selected eigenvectors and resolvent columns without refactoring.
pub struct Factorization<T> {
    tri: Tridiagonal<T>,
    eigenvalues: Vec<f64>,
}

impl<T: Scalar> Factorization<T> {
    pub fn new(matrix: SymmetricMatrix<T>) -> Result<Self> {
        check_dim(matrix.dim())?;
        let tri = Tridiagonal::new(matrix);
        let eigenvalues = tri.eigenvalues()?;
        Ok(Factorization { tri, eigenvalues })
    }

    pub fn dim(&self) -> usize {
        self.tri.dim()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Spectrum carrying eigenvectors for `indices` (deduplicated, sorted).
    pub fn spectrum(&self, indices: &[usize]) -> Result<Spectrum<T>> {
        let mut idx = indices.to_vec();
        idx.sort_unstable();
        idx.dedup();
        if let Some(&bad) = idx.iter().find(|&&j| j >= self.dim()) {
            return Err(Error::out_of_range("eigenvalue index", bad as i64, 0, self.dim() as i64 - 1));
        }
        let vectors = if idx.is_empty() {
            None
        } else {
            Some(self.tri.eigenvectors(&self.eigenvalues, &idx)?)
        };
        Ok(Spectrum {
            eigenvalues: self.eigenvalues.clone(),
            vectors,
            meta: None,
        })
    }

    /// The resolvent column `(H - z)^{-1} delta_x`, computed as
    /// `Q (T - z)^{-1} Q^H delta_x`.
    pub fn green_column(&self, x: usize, z: ComplexEnergy) -> Vec<Complex64> {
        self.tri.green_column(x, z)
    }
}

impl<T: Scalar> Tridiagonal<T> {
    /// Sorted eigenvalues of the reduced matrix.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let mut d = self.diag().to_vec();
        ql::ql_implicit::<T>(&mut d, self.offdiag(), None)?;
        d.sort_by(f64::total_cmp);
        Ok(d)
    }

    /// Eigenvectors of the original matrix for the given indices into the
    /// ascending `eigenvalues` (indices sorted, unique).
    pub fn eigenvectors(&self, eigenvalues: &[f64], indices: &[usize]) -> Result<EigenVectors<T>> {
        let n = self.dim();
        let lams: Vec<f64> = indices.iter().map(|&j| eigenvalues[j]).collect();
        let zs = invit::inverse_iteration(self.diag(), self.offdiag(), &lams)?;
        let mut cols: Vec<Vec<T>> = zs
            .into_iter()
            .map(|z| z.into_iter().map(T::from_re).collect())
            .collect();
        self.apply_q_batch(&mut cols);
        let mut data = Vec::with_capacity(n * cols.len());
        for c in cols {
            data.extend(c);
        }
        Ok(EigenVectors {
            dim: n,
            indices: indices.to_vec(),
            data,
        })
    }

    pub fn green_column(&self, x: usize, z: ComplexEnergy) -> Vec<Complex64> {
        let n = self.dim();
        let mut b = vec![Complex64::new(0.0, 0.0); n];
        b[x] = Complex64::new(1.0, 0.0);
        self.apply_qh_c64(&mut b);
        let lu = invit::TridiagLu::new(self.diag(), self.offdiag(), z.as_complex(), 0.0);
        lu.solve(&mut b);
        self.apply_q_c64(&mut b);
        b
    }
}

/// A spectral parameter `z = E + i eta` in the upper half plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexEnergy {
    pub re: f64,
    pub im: f64,
}

impl ComplexEnergy {
    pub fn new(re: f64, im: f64) -> Result<Self> {
        if !(im > 0.0) || !re.is_finite() || !im.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "spectral parameter must satisfy Im z > 0, got {re} + {im}i"
            )));
        }
        Ok(ComplexEnergy { re, im })
    }

    pub fn as_complex(self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    /// `E + 2^{-level} z`: the parameter whose kernel, over the unscaled
    /// spectrum, equals the kernel at `z` over points rescaled by `2^level`.
    pub fn zoom(self, energy: f64, level: u32) -> Self {
        let s = (-(level as f64)).exp2();
        ComplexEnergy {
            re: energy + s * self.re,
            im: s * self.im,
        }
    }
}

/// `P_z(lambda) = Im 1 / (lambda - z)`.
#[inline]
pub fn poisson_kernel(lambda: f64, z: ComplexEnergy) -> f64 {
    let dx = lambda - z.re;
    z.im / (dx * dx + z.im * z.im)
}

/// Normalized trace `dim^{-1} sum_j P_z(lambda_j)`.
pub fn nu_trace<T: Scalar>(spectrum: &Spectrum<T>, z: ComplexEnergy) -> f64 {
    nu_trace_values(spectrum.eigenvalues(), z)
}

pub fn nu_trace_values(eigenvalues: &[f64], z: ComplexEnergy) -> f64 {
    if eigenvalues.is_empty() {
        return 0.0;
    }
    eigenvalues.iter().map(|&l| poisson_kernel(l, z)).sum::<f64>() / eigenvalues.len() as f64
}

/// `G(x, y; z) = <delta_y, (H - z)^{-1} delta_x>` from the spectral
/// representation; needs the complete eigenvector set.
pub fn green_entry<T: Scalar>(
    spectrum: &Spectrum<T>,
    x: HierarchyIndex,
    y: HierarchyIndex,
    z: ComplexEnergy,
) -> Result<Complex64> {
    if x.level() != y.level() {
        return Err(Error::LevelMismatch(x.level(), y.level()));
    }
    if spectrum.dim() != 1usize << x.level() {
        return Err(Error::LevelMismatch(x.level(), spectrum.dim().trailing_zeros()));
    }
    let v = spectrum.vectors.as_ref().ok_or(Error::MissingEigenvectors(0))?;
    if v.indices.len() != spectrum.dim() {
        let missing = (0..spectrum.dim()).find(|j| v.indices.binary_search(j).is_err()).unwrap_or(0);
        return Err(Error::MissingEigenvectors(missing));
    }
    let zc = z.as_complex();
    let (xo, yo) = (x.offset(), y.offset());
    let mut g = Complex64::new(0.0, 0.0);
    for (k, &l) in spectrum.eigenvalues.iter().enumerate() {
        let col = v.column(k);
        g += col[yo].to_c64() * col[xo].to_c64().conj() / (Complex64::new(l, 0.0) - zc);
    }
    Ok(g)
}
