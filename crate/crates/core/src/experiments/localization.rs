use super::common::{log2_slope, median_se};
use super::trial::{factor_trial, green_eta, loc_setup, LocTrial};
use super::{dispatch, finish, new_table, require_valid, successes, ExperimentConfig, Lab};
use crate::ensemble::EnsembleScalar;
use crate::error::Result;
use crate::stats;
use crate::table::ResultTable;

/// Conditioned trials below this fraction trigger a warning.
const SPARSE_WINDOW_RATE: f64 = 0.1;

/// Eigenfunction mass outside `B_{m_n}(x)` in the shrinking window `W`
/// and the resolvent tail `2^{-n} sum_{y outside} |Im G(x, y; E + i eta)|`.
pub fn localization_run(lab: &Lab, cfg: &ExperimentConfig) -> Result<ResultTable> {
    require_valid(cfg)?;
    dispatch!(cfg.params, run(lab, cfg))
}

fn run<T: EnsembleScalar>(lab: &Lab, cfg: &ExperimentConfig) -> Result<ResultTable> {
    let mut table = new_table("localization", cfg);
    let c = cfg.params.c;
    let mut curve = Vec::new();
    for n in cfg.levels() {
        let p = cfg.params.with_level(n);
        let results = lab.run_trials(cfg.trials, |t| factor_trial::<T>(lab, cfg, &p, t, true, false));
        let ok = successes(results, &mut table)?;
        let locs: Vec<&LocTrial> = ok.iter().filter_map(|(_, o)| o.loc.as_ref()).collect();
        let median = localization_rows(&locs, cfg, c, n, &mut table);
        curve.push((n as f64, median));
    }
    if curve.len() >= 2 {
        let (s, se) = log2_slope(&curve);
        table.push(c, None, "median_mass_log2_slope_in_n", s, se, cfg.trials);
    }
    table.push(c, None, "two_mu", cfg.two_mu(c), 0.0, 0);
    Ok(finish(table))
}

/// Appends the per-level rows; returns the median mass.
pub(crate) fn localization_rows(locs: &[&LocTrial], cfg: &ExperimentConfig, c: f64, n: u32, table: &mut ResultTable) -> f64 {
    let trials = locs.len();
    let n_ = Some(n);
    let (w, m) = loc_setup(cfg, n);
    table.push(c, n_, "m_n", m as f64, 0.0, trials).m = Some(m);
    table.push(c, n_, "window_half_width", w.half_width, 0.0, trials);
    let counts: Vec<f64> = locs.iter().map(|l| l.window_count as f64).collect();
    let (mc, mc_se) = stats::mean_se(&counts);
    table.push(c, n_, "mean_window_count", mc, mc_se, trials);
    let conditioned: Vec<&&LocTrial> = locs.iter().filter(|l| l.window_count > 0).collect();
    let rate = conditioned.len() as f64 / trials.max(1) as f64;
    table.push(c, n_, "conditioning_rate", rate, (rate * (1.0 - rate) / trials.max(1) as f64).sqrt(), trials);
    if rate < SPARSE_WINDOW_RATE {
        table.warn(format!("window W held no eigenvalue in {:.0}% of trials at n = {n}", 100.0 * (1.0 - rate)));
    }
    let masses: Vec<f64> = conditioned.iter().flat_map(|l| l.masses.iter().copied()).collect();
    let k = conditioned.len();
    let (med, med_se) = median_se(&masses);
    table.push(c, n_, "median_mass", med, med_se, k).m = Some(m);
    let (q90, q90_se) = stats::quantile_se(&masses, 0.9);
    table.push(c, n_, "q90_mass", q90, q90_se, k).m = Some(m);
    let (mean, mean_se) = stats::mean_se(&masses);
    table.push(c, n_, "mean_mass", mean, mean_se, k).m = Some(m);

    let tails: Vec<f64> = locs.iter().flat_map(|l| l.green_tails.iter().copied()).collect();
    table.push(c, n_, "eta", green_eta(cfg, n), 0.0, trials);
    let (gm, gm_se) = median_se(&tails);
    table.push(c, n_, "median_green_tail", gm, gm_se, trials).m = Some(m);
    let (ga, ga_se) = stats::mean_se(&tails);
    table.push(c, n_, "mean_green_tail", ga, ga_se, trials).m = Some(m);
    med
}
