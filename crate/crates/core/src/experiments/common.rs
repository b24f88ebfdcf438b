use super::ExperimentConfig;
use crate::observables::{gap_ratios, ks_distance, rescale_values, GapReference, PointSample};
use crate::stats;
use crate::table::ResultTable;

/// Rescaled half-width holding about `target` eigenvalues around `energy`:
/// the median over trials of the `target`-th smallest `2^n |lambda - E|`.
pub(crate) fn auto_half_width(spectra: &[&[f64]], energy: f64, target: usize) -> f64 {
    let per: Vec<f64> = spectra
        .iter()
        .filter(|s| !s.is_empty())
        .map(|s| {
            let scale = s.len() as f64;
            let mut d: Vec<f64> = s.iter().map(|&l| scale * (l - energy).abs()).collect();
            let k = target.min(d.len()) - 1;
            d.select_nth_unstable_by(k, f64::total_cmp);
            d[k]
        })
        .collect();
    stats::median(&per)
}

/// Cuts each spectrum to the gap window, widening it (with a warning) while
/// more than half the trials hold fewer than 3 points.
pub(crate) fn gap_window(
    spectra: &[(u64, &[f64])],
    cfg: &ExperimentConfig,
    table: &mut ResultTable,
) -> (f64, Vec<PointSample>) {
    let values: Vec<&[f64]> = spectra.iter().map(|(_, s)| *s).collect();
    let mut h = cfg
        .window
        .unwrap_or_else(|| auto_half_width(&values, cfg.energy, cfg.window_target));
    if !(h > 0.0) {
        h = 1.0;
    }
    loop {
        let samples: Vec<PointSample> = spectra
            .iter()
            .map(|&(t, s)| rescale_values(s, cfg.energy, Some(h), t))
            .collect();
        let sparse = samples.iter().filter(|s| s.len() < 3).count();
        let reachable = spectra.iter().all(|(_, s)| {
            let scale = s.len() as f64;
            s.iter().all(|&l| scale * (l - cfg.energy).abs() <= h)
        });
        if 2 * sparse <= samples.len() || reachable {
            return (h, samples);
        }
        table.warn(format!(
            "gap window held fewer than 3 eigenvalues in {sparse} of {} trials; widened from {h} to {}",
            samples.len(),
            2.0 * h
        ));
        h *= 2.0;
    }
}

pub(crate) struct GapSummary {
    pub mean: f64,
    pub se: f64,
    pub ratios: usize,
    pub degenerate: usize,
    pub trials: usize,
    pub ks_exponential: (f64, f64),
    pub ks_surmise: (f64, f64),
}

fn pooled_ks(groups: &[&Vec<f64>], reference: GapReference) -> f64 {
    let all: Vec<f64> = groups.iter().flat_map(|g| g.iter().copied()).collect();
    ks_distance(&all, reference).unwrap_or(f64::NAN)
}

pub(crate) fn gap_summary(samples: &[PointSample]) -> GapSummary {
    let mut sums = Vec::new();
    let mut counts = Vec::new();
    let mut degenerate = 0;
    let mut gaps: Vec<Vec<f64>> = Vec::new();
    for s in samples {
        if let Ok(r) = gap_ratios(s) {
            sums.push(r.sum());
            counts.push(r.values.len() as f64);
            degenerate += r.degenerate;
        }
        let (g, _) = s.unfolded_gaps();
        if !g.is_empty() {
            gaps.push(g);
        }
    }
    let (mean, se) = if sums.is_empty() {
        (f64::NAN, f64::NAN)
    } else {
        stats::ratio_se(&sums, &counts)
    };
    GapSummary {
        mean,
        se,
        ratios: counts.iter().sum::<f64>() as usize,
        degenerate,
        trials: sums.len(),
        ks_exponential: stats::jackknife(&gaps, |g| pooled_ks(g, GapReference::Poisson(1.0))),
        ks_surmise: stats::jackknife(&gaps, |g| pooled_ks(g, GapReference::GoeSurmise)),
    }
}

/// Counts in consecutive boxes of width `width` tiling `[-h, h]` symmetrically.
pub(crate) fn box_counts(sample: &PointSample, h: f64, width: f64) -> Vec<usize> {
    let k = (2.0 * h / width).floor() as usize;
    let start = -(k as f64) * width / 2.0;
    (0..k)
        .map(|i| {
            let lo = start + i as f64 * width;
            sample.count_in(lo, lo + width)
        })
        .collect()
}

/// Variance over mean of all pooled counts.
pub(crate) fn pooled_dispersion(groups: &[&Vec<usize>]) -> f64 {
    let xs: Vec<f64> = groups.iter().flat_map(|g| g.iter().map(|&c| c as f64)).collect();
    if xs.len() < 2 {
        return f64::NAN;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    var / mean
}

/// Least-squares slope of `log2 y` against `x` over positive finite `y`.
pub(crate) fn log2_slope(points: &[(f64, f64)]) -> (f64, f64) {
    let (xs, ys): (Vec<f64>, Vec<f64>) = points
        .iter()
        .filter(|(_, y)| *y > 0.0 && y.is_finite())
        .map(|&(x, y)| (x, y.log2()))
        .unzip();
    if xs.len() < 2 {
        return (f64::NAN, f64::NAN);
    }
    let (slope, _, se) = stats::least_squares(&xs, &ys);
    (slope, se)
}

/// Median with its order-statistic standard error.
pub(crate) fn median_se(xs: &[f64]) -> (f64, f64) {
    stats::quantile_se(xs, 0.5)
}
