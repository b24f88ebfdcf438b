use super::common::{gap_summary, gap_window};
use super::delocalization::bulk_rows;
use super::localization::localization_rows;
use super::trial::{factor_trial, BulkTrial, LocTrial};
use super::{dispatch, finish, new_table, require_valid, successes, ExperimentConfig, Lab};
use crate::ensemble::EnsembleScalar;
use crate::error::Result;
use crate::table::ResultTable;

/// Statistics reported for every `(c, n)` cell.
pub const SWEEP_STATISTICS: [&str; 3] = ["gap_ratio_mean", "median_ipr_scaled", "median_mass"];

/// Grid over `c_list x n_list`: mean gap ratio, median `ipr * 2^n` and
/// median localization mass, each computed exactly as in the single runs.
pub fn phase_sweep(lab: &Lab, cfg: &ExperimentConfig) -> Result<ResultTable> {
    require_valid(cfg)?;
    dispatch!(cfg.params, run(lab, cfg))
}

fn run<T: EnsembleScalar>(lab: &Lab, cfg: &ExperimentConfig) -> Result<ResultTable> {
    let mut table = new_table("sweep", cfg);
    for c in cfg.couplings() {
        for n in cfg.levels() {
            let mut p = cfg.params.with_level(n);
            p.c = c;
            let results = lab.run_trials(cfg.trials, |t| factor_trial::<T>(lab, cfg, &p, t, true, true));
            let ok = successes(results, &mut table)?;
            let mut scratch = ResultTable::new("", "", 0);
            let spectra: Vec<(u64, &[f64])> = ok.iter().map(|(t, o)| (*t, o.eigenvalues.as_slice())).collect();
            let (_, samples) = gap_window(&spectra, cfg, &mut scratch);
            let g = gap_summary(&samples);
            scratch.push(c, Some(n), "gap_ratio_mean", g.mean, g.se, g.trials);
            let bulks: Vec<&BulkTrial> = ok.iter().filter_map(|(_, o)| o.bulk.as_ref()).collect();
            bulk_rows(&bulks, c, n, &mut scratch);
            let locs: Vec<&LocTrial> = ok.iter().filter_map(|(_, o)| o.loc.as_ref()).collect();
            let mut loc_cfg = cfg.clone();
            loc_cfg.params = p;
            localization_rows(&locs, &loc_cfg, c, n, &mut scratch);
            for s in SWEEP_STATISTICS {
                if let Some(r) = scratch.get(s, Some(n)) {
                    let mut r = r.clone();
                    r.m = None;
                    table.rows.push(r);
                }
            }
            for w in scratch.warnings {
                table.warn(format!("c = {c}, n = {n}: {w}"));
            }
        }
    }
    Ok(finish(table))
}
