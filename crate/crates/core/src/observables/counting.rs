use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

use super::PointSample;

/// Distribution of the number of points of each sample in a fixed box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountingStatistics {
    /// `histogram[k]` samples had exactly `k` points in the box.
    pub histogram: Vec<usize>,
    pub samples: usize,
    pub mean: f64,
    pub mean_se: f64,
    pub variance: f64,
    /// `variance / mean`; `NaN` when no sample has a point.
    pub dispersion: f64,
    pub dispersion_se: f64,
}

impl CountingStatistics {
    /// `P(count >= l)` with its binomial standard error.
    pub fn tail(&self, l: usize) -> (f64, f64) {
        let k: usize = self.histogram.iter().skip(l).sum();
        let n = self.samples as f64;
        let p = k as f64 / n;
        (p, (p * (1.0 - p) / n).sqrt())
    }
}

/// Counts per sample in the half-open box `[lo, hi)` (rescaled units).
pub fn counting_statistics(samples: &[PointSample], lo: f64, hi: f64) -> Result<CountingStatistics> {
    let counts: Vec<usize> = samples.iter().map(|s| s.count_in(lo, hi)).collect();
    from_counts(&counts)
}

pub fn from_counts(counts: &[usize]) -> Result<CountingStatistics> {
    if counts.is_empty() {
        return Err(Error::EmptyPool);
    }
    let nmax = counts.iter().copied().max().unwrap_or(0);
    let mut histogram = vec![0usize; nmax + 1];
    for &c in counts {
        histogram[c] += 1;
    }
    let n = counts.len() as f64;
    let xs: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let mean = xs.iter().sum::<f64>() / n;
    let variance = if counts.len() > 1 {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let (dispersion, dispersion_se) = dispersion_with_se(&xs);
    Ok(CountingStatistics {
        histogram,
        samples: counts.len(),
        mean,
        mean_se: (variance / n).sqrt(),
        variance,
        dispersion,
        dispersion_se,
    })
}

/// Index of dispersion with a delta-method standard error.
fn dispersion_with_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if mean == 0.0 || xs.len() < 2 {
        return (f64::NAN, f64::NAN);
    }
    let m2 = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let m3 = xs.iter().map(|x| (x - mean).powi(3)).sum::<f64>() / n;
    let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
    let var = m2 * n / (n - 1.0);
    let d = var / mean;
    // gradient of m2/mean in (mean, m2) applied to their joint covariance
    let var_m = m2 / n;
    let var_m2 = (m4 - m2 * m2) / n;
    let cov = m3 / n;
    let (ga, gb) = (-m2 / (mean * mean), 1.0 / mean);
    let v = ga * ga * var_m + gb * gb * var_m2 + 2.0 * ga * gb * cov;
    (d, v.max(0.0).sqrt())
}
