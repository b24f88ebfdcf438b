use crate::error::{Error, Result};
use crate::stats;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Histogram bin edges, strictly increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bins {
    edges: Vec<f64>,
}

impl Bins {
    pub fn uniform(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if count == 0 || !(hi > lo) {
            return Err(Error::InvalidParameter(format!("bad bins [{lo}, {hi}] x {count}")));
        }
        let w = (hi - lo) / count as f64;
        let mut edges: Vec<f64> = (0..count).map(|k| lo + k as f64 * w).collect();
        edges.push(hi);
        Ok(Bins { edges })
    }

    pub fn from_edges(edges: Vec<f64>) -> Result<Self> {
        if edges.len() < 2 || edges.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("bin edges must increase".into()));
        }
        Ok(Bins { edges })
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn width(&self, b: usize) -> f64 {
        self.edges[b + 1] - self.edges[b]
    }

    /// Counts per bin, bins half-open except the last, plus the number of
    /// values outside every bin.
    pub fn counts(&self, sorted_values: &[f64]) -> (Vec<usize>, usize) {
        let last = self.edges.len() - 1;
        let pos: Vec<usize> = self
            .edges
            .iter()
            .enumerate()
            .map(|(k, &e)| {
                if k == last {
                    sorted_values.partition_point(|&x| x <= e)
                } else {
                    sorted_values.partition_point(|&x| x < e)
                }
            })
            .collect();
        let counts: Vec<usize> = pos.windows(2).map(|w| w[1] - w[0]).collect();
        let inside: usize = counts.iter().sum();
        (counts, sorted_values.len() - inside)
    }
}

/// Trial-averaged density of states per site and unit energy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DosEstimate {
    pub bins: Bins,
    pub density: Vec<f64>,
    pub se: Vec<f64>,
    pub trials: usize,
    /// Fraction of all eigenvalues that fell inside the bins.
    pub captured: f64,
}

impl DosEstimate {
    pub fn integral(&self) -> f64 {
        self.density.iter().enumerate().map(|(b, d)| d * self.bins.width(b)).sum()
    }

    pub fn max_density(&self) -> f64 {
        self.density.iter().copied().fold(0.0, f64::max)
    }
}

fn check_pool<S: AsRef<[f64]>>(pool: &[S]) -> Result<usize> {
    let first = pool.first().ok_or(Error::EmptyPool)?.as_ref().len();
    if first == 0 {
        return Err(Error::EmptyPool);
    }
    if pool.iter().any(|s| s.as_ref().len() != first) {
        return Err(Error::InvalidParameter("spectra in a pool must share their dimension".into()));
    }
    Ok(first)
}

/// Histogram of a pool of sorted spectra of equal dimension.
pub fn dos_estimate<S: AsRef<[f64]>>(pool: &[S], bins: &Bins) -> Result<DosEstimate> {
    let dim = check_pool(pool)? as f64;
    let nb = bins.len();
    let mut per_trial: Vec<Vec<f64>> = vec![Vec::with_capacity(pool.len()); nb];
    let mut outside = 0usize;
    for s in pool {
        let (counts, out) = bins.counts(s.as_ref());
        outside += out;
        for b in 0..nb {
            per_trial[b].push(counts[b] as f64 / (dim * bins.width(b)));
        }
    }
    let (density, se) = per_trial.iter().map(|v| stats::mean_se(v)).unzip();
    Ok(DosEstimate {
        bins: bins.clone(),
        density,
        se,
        trials: pool.len(),
        captured: 1.0 - outside as f64 / (dim * pool.len() as f64),
    })
}

/// Density at `energy` from the box `[energy - h, energy + h]`, with its
/// standard error over trials.
pub fn nu_hat<S: AsRef<[f64]>>(pool: &[S], energy: f64, half_width: f64) -> Result<(f64, f64)> {
    let bins = Bins::uniform(energy - half_width, energy + half_width, 1)?;
    let d = dos_estimate(pool, &bins)?;
    Ok((d.density[0], d.se[0]))
}

/// `sqrt(4 - E^2) / (2 pi)` on `[-2, 2]`.
pub fn semicircle_density(e: f64) -> f64 {
    (4.0 - e * e).max(0.0).sqrt() / (2.0 * PI)
}

pub fn semicircle_cdf(e: f64) -> f64 {
    let x = e.clamp(-2.0, 2.0);
    0.5 + (x * (4.0 - x * x).sqrt() + 4.0 * (x / 2.0).asin()) / (4.0 * PI)
}

/// L1 distance between the pooled histogram on `bins` and the bin averages
/// of the semicircle density, plus the mass each puts outside the bins.
/// Returns the distance and its jackknife standard error over trials.
pub fn dos_l1_to_semicircle<S: AsRef<[f64]> + Sync>(pool: &[S], bins: &Bins) -> Result<(f64, f64)> {
    let dim = check_pool(pool)? as f64;
    let nb = bins.len();
    let e = bins.edges();
    let target: Vec<f64> = (0..nb).map(|b| semicircle_cdf(e[b + 1]) - semicircle_cdf(e[b])).collect();
    let sc_outside = 1.0 - target.iter().sum::<f64>();
    let per: Vec<(Vec<usize>, usize)> = pool.iter().map(|s| bins.counts(s.as_ref())).collect();
    let est = |sub: &[&(Vec<usize>, usize)]| {
        let t = sub.len() as f64 * dim;
        let mut l1 = 0.0;
        for b in 0..nb {
            let mass: usize = sub.iter().map(|(c, _)| c[b]).sum();
            l1 += (mass as f64 / t - target[b]).abs();
        }
        let out: usize = sub.iter().map(|(_, o)| o).sum();
        l1 + (out as f64 / t - sc_outside).abs()
    };
    Ok(stats::jackknife(&per, est))
}
