use crate::error::{Error, Result};
use crate::hierarchy::{ball, HierarchyIndex};
use crate::scalar::Scalar;
use crate::spectral::Spectrum;
use serde::{Deserialize, Serialize};

/// Tolerance on `| |psi|_2 - 1 |`.
pub const NORM_TOL: f64 = 1e-8;

/// Closed energy interval `[E - h, E + h]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralWindow {
    pub center: f64,
    pub half_width: f64,
}

impl SpectralWindow {
    pub fn new(center: f64, half_width: f64) -> Result<Self> {
        if !(half_width > 0.0) {
            return Err(Error::InvalidParameter(format!("window half-width must be positive, got {half_width}")));
        }
        Ok(SpectralWindow { center, half_width })
    }

    pub fn everything() -> Self {
        SpectralWindow {
            center: 0.0,
            half_width: f64::INFINITY,
        }
    }

    /// `[E - 2^{-(1-w)n}, E + 2^{-(1-w)n}]`.
    pub fn shrinking(center: f64, n: u32, w: f64) -> Self {
        SpectralWindow {
            center,
            half_width: (-(1.0 - w) * n as f64).exp2(),
        }
    }

    pub fn lo(&self) -> f64 {
        self.center - self.half_width
    }

    pub fn hi(&self) -> f64 {
        self.center + self.half_width
    }

    pub fn contains(&self, x: f64) -> bool {
        (x - self.center).abs() <= self.half_width
    }
}

fn window_vectors<'a, T: Scalar>(spectrum: &'a Spectrum<T>, w: &SpectralWindow) -> Result<Vec<&'a [T]>> {
    spectrum
        .indices_in(w.lo(), w.hi())
        .map(|j| spectrum.vector(j).ok_or(Error::MissingEigenvectors(j)))
        .collect()
}

fn check_site<T: Scalar>(spectrum: &Spectrum<T>, x: HierarchyIndex) -> Result<()> {
    if spectrum.dim() != 1usize << x.level() {
        return Err(Error::LevelMismatch(x.level(), spectrum.dim().trailing_zeros()));
    }
    Ok(())
}

/// `Q(x, y; W) = sum over lambda_j in W of |psi_j(x) psi_j(y)|`.
pub fn eigenfunction_correlator<T: Scalar>(
    spectrum: &Spectrum<T>,
    x: HierarchyIndex,
    y: HierarchyIndex,
    w: &SpectralWindow,
) -> Result<f64> {
    if x.level() != y.level() {
        return Err(Error::LevelMismatch(x.level(), y.level()));
    }
    check_site(spectrum, x)?;
    let (a, b) = (x.offset(), y.offset());
    Ok(window_vectors(spectrum, w)?
        .iter()
        .map(|v| v[a].abs() * v[b].abs())
        .sum())
}

/// `sum over y outside B_m(x) of Q(x, y; W)`.
pub fn mass_outside_ball<T: Scalar>(
    spectrum: &Spectrum<T>,
    x: HierarchyIndex,
    m: u32,
    w: &SpectralWindow,
) -> Result<f64> {
    check_site(spectrum, x)?;
    let b = ball(x, m)?.offsets();
    let a = x.offset();
    let mut total = 0.0;
    for v in window_vectors(spectrum, w)? {
        let px = v[a].abs();
        if px == 0.0 {
            continue;
        }
        let outside: f64 = v[..b.start].iter().chain(&v[b.end..]).map(|e| e.abs()).sum();
        total += px * outside;
    }
    Ok(total)
}

fn check_norm<T: Scalar>(v: &[T]) -> Result<()> {
    let n2: f64 = v.iter().map(|e| e.abs2()).sum();
    if (n2.sqrt() - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized(n2.sqrt()));
    }
    Ok(())
}

/// Inverse participation ratio `sum |psi(x)|^4`.
pub fn ipr<T: Scalar>(v: &[T]) -> Result<f64> {
    check_norm(v)?;
    Ok(v.iter().map(|e| e.abs2() * e.abs2()).sum())
}

pub fn sup_norm<T: Scalar>(v: &[T]) -> Result<f64> {
    check_norm(v)?;
    Ok(v.iter().map(|e| e.abs()).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{assemble, EnsembleParams};
    use crate::matrix::SymmetricMatrix;
    use crate::spectral::eigh;

    #[test]
    fn norms_of_special_vectors() {
        let mut d = vec![0.0; 16];
        d[3] = 1.0;
        assert_eq!(ipr(&d).unwrap(), 1.0);
        assert_eq!(sup_norm(&d).unwrap(), 1.0);
        let f = vec![0.25; 16];
        assert!((ipr(&f).unwrap() - 1.0 / 16.0).abs() < 1e-15);
        assert_eq!(sup_norm(&f).unwrap(), 0.25);
        assert!(matches!(ipr(&[0.5, 0.5]), Err(Error::NotNormalized(_))));
    }

    #[test]
    fn correlator_examples() {
        let s = eigh(SymmetricMatrix::from_upper(1, |_, _| 0.3), true).unwrap();
        let x = HierarchyIndex::new(1, 0).unwrap();
        let w = SpectralWindow::new(0.0, 1.0).unwrap();
        assert_eq!(eigenfunction_correlator(&s, x, x, &w).unwrap(), 1.0);
        assert_eq!(mass_outside_ball(&s, x, 0, &w).unwrap(), 0.0);
    }

    #[test]
    fn completeness_and_block_support() {
        let p = EnsembleParams::new(5, 1.0).with_seed(3);
        let h = assemble::<f64>(&p, 0, 5).unwrap();
        let s = eigh(h, true).unwrap();
        let all = SpectralWindow::everything();
        for v in 1..=32 {
            let x = HierarchyIndex::new(v, 5).unwrap();
            assert!((eigenfunction_correlator(&s, x, x, &all).unwrap() - 1.0).abs() < 1e-10);
            assert_eq!(mass_outside_ball(&s, x, 5, &all).unwrap(), 0.0);
            let y = HierarchyIndex::new(33 - v, 5).unwrap();
            let q = eigenfunction_correlator(&s, x, y, &all).unwrap();
            let qx = eigenfunction_correlator(&s, x, x, &all).unwrap();
            let qy = eigenfunction_correlator(&s, y, y, &all).unwrap();
            assert!(q * q <= qx * qy * (1.0 + 1e-12));
        }
        let t = eigh(assemble::<f64>(&p, 0, 2).unwrap(), true).unwrap();
        let x = HierarchyIndex::new(7, 5).unwrap();
        assert_eq!(mass_outside_ball(&t, x, 2, &all).unwrap(), 0.0);
        assert_eq!(mass_outside_ball(&t, x, 3, &all).unwrap(), 0.0);
        let far = HierarchyIndex::new(30, 5).unwrap();
        assert_eq!(eigenfunction_correlator(&t, x, far, &all).unwrap(), 0.0);
    }

    #[test]
    fn missing_vectors_are_reported() {
        let s: Spectrum<f64> = Spectrum::from_eigenvalues(vec![0.0, 1.0]);
        let x = HierarchyIndex::new(1, 1).unwrap();
        let w = SpectralWindow::new(0.0, 0.5).unwrap();
        assert_eq!(eigenfunction_correlator(&s, x, x, &w), Err(Error::MissingEigenvectors(0)));
        let w = SpectralWindow::new(5.0, 0.5).unwrap();
        assert_eq!(eigenfunction_correlator(&s, x, x, &w), Ok(0.0));
    }
}
