use super::{ExperimentConfig, Lab};
use crate::ensemble::{EnsembleParams, EnsembleScalar, RngStream, StreamDomain, StreamPath};
use crate::error::Result;
use crate::hierarchy::{ball, HierarchyIndex};
use crate::observables::{ipr, mass_outside_ball, sup_norm, SpectralWindow};
use crate::spectral::ComplexEnergy;
use std::sync::Arc;

pub(crate) struct LocTrial {
    pub window_count: usize,
    /// One per sampled site; empty when the window holds no eigenvalue.
    pub masses: Vec<f64>,
    pub green_tails: Vec<f64>,
}

pub(crate) struct BulkTrial {
    /// `ipr * 2^n` per bulk eigenvector.
    pub ipr: Vec<f64>,
    /// `sup_norm * 2^{n/2}` per bulk eigenvector.
    pub sup: Vec<f64>,
}

pub(crate) struct TrialOut {
    pub eigenvalues: Arc<Vec<f64>>,
    pub loc: Option<LocTrial>,
    pub bulk: Option<BulkTrial>,
}

/// Indices of the `k` eigenvalues closest to `energy` (a contiguous run).
pub(crate) fn nearest(ev: &[f64], energy: f64, k: usize) -> std::ops::Range<usize> {
    let k = k.min(ev.len());
    let mut lo = ev.partition_point(|&l| l < energy);
    let mut hi = lo;
    while hi - lo < k {
        let take_left = lo > 0 && (hi == ev.len() || energy - ev[lo - 1] <= ev[hi] - energy);
        if take_left {
            lo -= 1;
        } else {
            hi += 1;
        }
    }
    lo..hi
}

/// Sites sampled uniformly with replacement for one trial at level `n`.
pub(crate) fn sample_sites(seed: u64, trial: u64, n: u32, count: usize) -> Vec<HierarchyIndex> {
    let mut s = RngStream::new(
        seed,
        StreamPath {
            domain: StreamDomain::Sites,
            trial,
            level: n,
            block: 0,
        },
    );
    (0..count)
        .map(|_| HierarchyIndex::from_offset(s.below(1u64 << n) as usize, n).expect("site in range"))
        .collect()
}

/// Localization window `W = [E - 2^{-(1-w)n}, E + 2^{-(1-w)n}]` and `m_n`.
pub(crate) fn loc_setup(cfg: &ExperimentConfig, n: u32) -> (SpectralWindow, u32) {
    (SpectralWindow::shrinking(cfg.energy, n, cfg.w), cfg.m_n(n).min(n))
}

pub(crate) fn green_eta(cfg: &ExperimentConfig, n: u32) -> f64 {
    (-(1.0 + cfg.ell_loc) * n as f64).exp2()
}

/// Factorizes `H_n` once and evaluates the requested eigenvector statistics.
/// Window and bulk vectors come from separate batches.
pub(crate) fn factor_trial<T: EnsembleScalar>(
    lab: &Lab,
    cfg: &ExperimentConfig,
    p: &EnsembleParams,
    t: u64,
    want_loc: bool,
    want_bulk: bool,
) -> Result<TrialOut> {
    let n = p.n;
    let f = lab.factorize::<T>(p, t)?;
    let eigenvalues = lab.remember(p, t, f.eigenvalues());
    let (w, m) = loc_setup(cfg, n);
    let window = if want_loc {
        eigenvalues.partition_point(|&l| l < w.lo())..eigenvalues.partition_point(|&l| l <= w.hi())
    } else {
        0..0
    };
    let bulk = if want_bulk {
        nearest(&eigenvalues, cfg.energy, cfg.bulk_vectors)
    } else {
        0..0
    };

    let loc = if want_loc {
        let sites = sample_sites(p.master_seed, t, n, cfg.sites);
        let masses = if window.is_empty() {
            Vec::new()
        } else {
            let spectrum = f.spectrum(&window.clone().collect::<Vec<_>>())?;
            sites
                .iter()
                .map(|&x| mass_outside_ball(&spectrum, x, m, &w))
                .collect::<Result<Vec<f64>>>()?
        };
        let z = ComplexEnergy::new(cfg.energy, green_eta(cfg, n))?;
        let scale = (-(n as f64)).exp2();
        let green_tails = sites
            .iter()
            .map(|&x| {
                let col = f.green_column(x.offset(), z);
                let b = ball(x, m).expect("m <= n").offsets();
                let tail: f64 = col[..b.start].iter().chain(&col[b.end..]).map(|g| g.im.abs()).sum();
                scale * tail
            })
            .collect();
        Some(LocTrial {
            window_count: window.len(),
            masses,
            green_tails,
        })
    } else {
        None
    };

    let bulk = if want_bulk {
        let dim = p.dim() as f64;
        let spectrum = f.spectrum(&bulk.clone().collect::<Vec<_>>())?;
        let mut ipr_s = Vec::with_capacity(bulk.len());
        let mut sup_s = Vec::with_capacity(bulk.len());
        for j in bulk {
            let v = spectrum.vector(j).expect("bulk vector computed");
            ipr_s.push(ipr(v)? * dim);
            sup_s.push(sup_norm(v)? * dim.sqrt());
        }
        Some(BulkTrial { ipr: ipr_s, sup: sup_s })
    } else {
        None
    };
    Ok(TrialOut { eigenvalues, loc, bulk })
}
