use super::common::{gap_summary, gap_window, log2_slope, median_se};
use super::trial::{factor_trial, BulkTrial};
use super::{dispatch, finish, new_table, require_valid, successes, ExperimentConfig, Lab, GOE_GAP_RATIO};
use crate::ensemble::{spread, EnsembleScalar};
use crate::error::Result;
use crate::observables::{dos_l1_to_semicircle, Bins};
use crate::stats;
use crate::table::ResultTable;

/// Bulk eigenvector norms, density of states against the semicircle, and
/// level repulsion.
pub fn delocalization_run(lab: &Lab, cfg: &ExperimentConfig) -> Result<ResultTable> {
    require_valid(cfg)?;
    dispatch!(cfg.params, run(lab, cfg))
}

fn run<T: EnsembleScalar>(lab: &Lab, cfg: &ExperimentConfig) -> Result<ResultTable> {
    let mut table = new_table("delocalization", cfg);
    let c = cfg.params.c;
    let mut curve = Vec::new();
    for n in cfg.levels() {
        let p = cfg.params.with_level(n);
        let results = lab.run_trials(cfg.trials, |t| factor_trial::<T>(lab, cfg, &p, t, false, true));
        let ok = successes(results, &mut table)?;
        let trials = ok.len();
        let n_ = Some(n);
        table.push(c, n_, "spread", spread(n, c), 0.0, 0);
        let bulks: Vec<&BulkTrial> = ok.iter().filter_map(|(_, o)| o.bulk.as_ref()).collect();
        let med = bulk_rows(&bulks, c, n, &mut table);
        curve.push((n as f64, med));

        let spectra: Vec<(u64, &[f64])> = ok.iter().map(|(t, o)| (*t, o.eigenvalues.as_slice())).collect();
        let values: Vec<&[f64]> = spectra.iter().map(|(_, s)| *s).collect();
        let bins = Bins::uniform(-cfg.dos_range, cfg.dos_range, cfg.dos_bins)?;
        let (l1, l1_se) = dos_l1_to_semicircle(&values, &bins)?;
        table.push(c, n_, "dos_l1_semicircle", l1, l1_se, trials);
        let outside = values
            .iter()
            .map(|s| s.iter().filter(|l| l.abs() > cfg.dos_range).count())
            .sum::<usize>() as f64
            / (values.len() * p.dim()).max(1) as f64;
        table.push(c, n_, "dos_mass_outside_bins", outside, 0.0, trials);
        let (_, samples) = gap_window(&spectra, cfg, &mut table);
        let g = gap_summary(&samples);
        table.push(c, n_, "gap_ratio_mean", g.mean, g.se, g.trials);
        table.push(c, n_, "gap_ratio_goe_reference", GOE_GAP_RATIO, 0.0, 0);
    }
    if curve.len() >= 2 {
        let (s, se) = log2_slope(&curve);
        table.push(c, None, "median_ipr_scaled_log2_slope_in_n", s, se, cfg.trials);
    }
    Ok(finish(table))
}

/// Appends the eigenvector-norm rows; returns the median of `ipr * 2^n`.
pub(crate) fn bulk_rows(bulks: &[&BulkTrial], c: f64, n: u32, table: &mut ResultTable) -> f64 {
    let trials = bulks.len();
    let n_ = Some(n);
    let ipr: Vec<f64> = bulks.iter().flat_map(|b| b.ipr.iter().copied()).collect();
    let sup: Vec<f64> = bulks.iter().flat_map(|b| b.sup.iter().copied()).collect();
    table.push(c, n_, "bulk_vectors", ipr.len() as f64, 0.0, trials);
    let (m, se) = median_se(&ipr);
    table.push(c, n_, "median_ipr_scaled", m, se, trials);
    let (a, ase) = stats::mean_se(&ipr);
    table.push(c, n_, "mean_ipr_scaled", a, ase, trials);
    let (q, qse) = stats::quantile_se(&ipr, 0.9);
    table.push(c, n_, "q90_ipr_scaled", q, qse, trials);
    let (s, sse) = median_se(&sup);
    table.push(c, n_, "median_sup_scaled", s, sse, trials);
    let (q, qse) = stats::quantile_se(&sup, 0.9);
    table.push(c, n_, "q90_sup_scaled", q, qse, trials);
    m
}
