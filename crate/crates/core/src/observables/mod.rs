//! Point-process and eigenvector statistics.

pub mod counting;
pub mod dos;
pub mod gaps;
pub mod vectors;

pub use counting::{counting_statistics, CountingStatistics};
pub use dos::{dos_estimate, dos_l1_to_semicircle, nu_hat, semicircle_density, Bins, DosEstimate};
pub use gaps::{gap_ratios, ks_distance, GapRatios, GapReference};
pub use vectors::{eigenfunction_correlator, ipr, mass_outside_ball, sup_norm, SpectralWindow};

use crate::scalar::Scalar;
use crate::spectral::Spectrum;
use serde::{Deserialize, Serialize};

/// Where and how a [`PointSample`] was cut from its spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleMeta {
    pub trial: u64,
    pub energy: f64,
    pub scale: f64,
    /// Half-width of the window in rescaled units; infinite when uncut.
    pub half_width: f64,
}

/// Sorted rescaled eigenvalues `scale * (lambda - E)` inside a window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSample {
    points: Vec<f64>,
    pub meta: SampleMeta,
}

impl PointSample {
    /// Sorts and keeps the points inside `meta.half_width`.
    pub fn new(mut points: Vec<f64>, meta: SampleMeta) -> Self {
        points.retain(|p| p.abs() <= meta.half_width);
        points.sort_by(f64::total_cmp);
        PointSample { points, meta }
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Number of points in the half-open box `[lo, hi)`.
    pub fn count_in(&self, lo: f64, hi: f64) -> usize {
        let a = self.points.partition_point(|&p| p < lo);
        let b = self.points.partition_point(|&p| p < hi);
        b - a
    }

    /// Nearest-neighbour gaps divided by their mean, with degenerate levels
    /// merged; also returns how many were merged.
    pub fn unfolded_gaps(&self) -> (Vec<f64>, usize) {
        let (distinct, merged) = gaps::merge_degenerate(&self.points);
        let g: Vec<f64> = distinct.windows(2).map(|w| w[1] - w[0]).collect();
        if g.is_empty() {
            return (g, merged);
        }
        let mean = g.iter().sum::<f64>() / g.len() as f64;
        (g.into_iter().map(|s| s / mean).collect(), merged)
    }
}

/// Rescales a spectrum about `energy` by its dimension `2^n`, keeping points
/// with `|2^n (lambda - E)| <= half_width` (all points when `None`).
pub fn rescale<T: Scalar>(spectrum: &Spectrum<T>, energy: f64, half_width: Option<f64>) -> PointSample {
    rescale_values(spectrum.eigenvalues(), energy, half_width, spectrum.meta.map_or(0, |m| m.trial))
}

pub fn rescale_values(eigenvalues: &[f64], energy: f64, half_width: Option<f64>, trial: u64) -> PointSample {
    let scale = eigenvalues.len() as f64;
    let h = half_width.unwrap_or(f64::INFINITY);
    let lo = eigenvalues.partition_point(|&l| scale * (l - energy) < -h);
    let hi = eigenvalues.partition_point(|&l| scale * (l - energy) <= h);
    let points = eigenvalues[lo..hi.max(lo)].iter().map(|&l| scale * (l - energy)).collect();
    PointSample::new(
        points,
        SampleMeta {
            trial,
            energy,
            scale,
            half_width: h,
        },
    )
}
