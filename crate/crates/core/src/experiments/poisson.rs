use super::common::{box_counts, gap_summary, gap_window, pooled_dispersion};
use super::{dispatch, finish, new_table, require_valid, successes, ExperimentConfig, Lab, GOE_GAP_RATIO, POISSON_GAP_RATIO};
use crate::ensemble::EnsembleScalar;
use crate::error::Result;
use crate::observables::nu_hat;
use crate::stats;
use crate::table::ResultTable;

/// Local level statistics of `H_n` near `E`: gap ratios, unfolded gap
/// laws, box-count dispersion and intensity against the density of states.
pub fn poisson_test(lab: &Lab, cfg: &ExperimentConfig) -> Result<ResultTable> {
    require_valid(cfg)?;
    dispatch!(cfg.params, run(lab, cfg))
}

fn run<T: EnsembleScalar>(lab: &Lab, cfg: &ExperimentConfig) -> Result<ResultTable> {
    let mut table = new_table("poisson-test", cfg);
    let p = cfg.params;
    let results = lab.run_trials(cfg.trials, |t| lab.eigenvalues::<T>(&p, t));
    let spectra = successes(results, &mut table)?;
    if spectra.is_empty() {
        return Ok(finish(table));
    }
    let refs: Vec<(u64, &[f64])> = spectra.iter().map(|(t, s)| (*t, s.as_slice())).collect();
    poisson_rows(&refs, cfg, p.c, p.n, &mut table);
    if p.c <= 0.0 {
        for r in &mut table.rows {
            r.flag = "exploratory".into();
        }
    }
    Ok(finish(table))
}

pub(crate) fn poisson_rows(spectra: &[(u64, &[f64])], cfg: &ExperimentConfig, c: f64, n: u32, table: &mut ResultTable) {
    let trials = spectra.len();
    let n_ = Some(n);
    let (h, samples) = gap_window(spectra, cfg, table);
    let sizes: Vec<f64> = samples.iter().map(|s| s.len() as f64).collect();
    let (mp, mp_se) = stats::mean_se(&sizes);
    table.push(c, n_, "window_half_width_rescaled", h, 0.0, trials);
    table.push(c, n_, "window_points", mp, mp_se, trials);

    let g = gap_summary(&samples);
    table.push(c, n_, "gap_ratio_mean", g.mean, g.se, g.trials);
    table.push(c, n_, "gap_ratio_count", g.ratios as f64, 0.0, g.trials);
    table.push(c, n_, "gap_ratio_poisson_reference", POISSON_GAP_RATIO, 0.0, 0);
    table.push(c, n_, "gap_ratio_goe_reference", GOE_GAP_RATIO, 0.0, 0);
    table.push(c, n_, "degenerate_levels", g.degenerate as f64, 0.0, trials);
    table.push(c, n_, "ks_exponential", g.ks_exponential.0, g.ks_exponential.1, trials);
    table.push(c, n_, "ks_goe_surmise", g.ks_surmise.0, g.ks_surmise.1, trials);

    let counts: Vec<Vec<usize>> = samples.iter().map(|s| box_counts(s, h, cfg.box_width)).collect();
    let boxes = counts.first().map_or(0, Vec::len);
    let (disp, disp_se) = stats::jackknife(&counts, pooled_dispersion);
    table.push(c, n_, "boxes_per_trial", boxes as f64, 0.0, trials);
    table.push(c, n_, "box_dispersion", disp, disp_se, trials);
    let per_box: Vec<f64> = counts
        .iter()
        .map(|v| v.iter().sum::<usize>() as f64 / v.len().max(1) as f64)
        .collect();
    let (mb, mb_se) = stats::mean_se(&per_box);
    table.push(c, n_, "box_mean_count", mb, mb_se, trials);

    let (intensity, int_se) = stats::mean_se(&sizes.iter().map(|k| k / (2.0 * h)).collect::<Vec<_>>());
    let values: Vec<&[f64]> = spectra.iter().map(|(_, s)| *s).collect();
    let (nu, nu_se) = nu_hat(&values, cfg.energy, cfg.bandwidth).unwrap_or((f64::NAN, f64::NAN));
    table.push(c, n_, "intensity", intensity, int_se, trials);
    table.push(c, n_, "nu_hat", nu, nu_se, trials);
    let ratio = intensity / nu;
    let ratio_se = ratio * ((int_se / intensity).powi(2) + (nu_se / nu).powi(2)).sqrt();
    table.push(c, n_, "intensity_over_nu_hat", ratio, ratio_se, trials);
    table.push(c, n_, "nu_hat_times_box", nu * cfg.box_width, nu_se * cfg.box_width, trials);
}
