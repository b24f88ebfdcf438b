use super::common::log2_slope;
use super::{dispatch, finish, new_table, require_valid, successes, ExperimentConfig, Lab};
use crate::ensemble::{assemble_block, EnsembleScalar};
use crate::error::{Error, Result};
use crate::spectral::{eigh, nu_trace_values};
use crate::stats;
use crate::table::ResultTable;

/// Coupled-trial distance `|nu_n - nu_{n,m}|(P_{z_n})` between `H_n` and its
/// truncations, with `z_n = E + 2^{-n} z`.
pub fn truncation_flow(lab: &Lab, cfg: &ExperimentConfig) -> Result<ResultTable> {
    require_valid(cfg)?;
    if cfg.truncations().is_empty() {
        return Err(Error::InvalidParameter("empty truncation range".into()));
    }
    dispatch!(cfg.params, run(lab, cfg))
}

/// Sorted spectrum of `H_{n,m}` from its diagonal blocks.
fn truncated_spectrum<T: EnsembleScalar>(lab: &Lab, p: &crate::ensemble::EnsembleParams, t: u64, m: u32) -> Result<Vec<f64>> {
    if m == p.n {
        return Ok(lab.eigenvalues::<T>(p, t)?.to_vec());
    }
    let mut all = Vec::with_capacity(p.dim());
    for j in 0..(1u64 << (p.n - m)) {
        all.extend(eigh(assemble_block::<T>(p, t, m, j)?, false)?.into_eigenvalues());
    }
    all.sort_by(f64::total_cmp);
    Ok(all)
}

fn run<T: EnsembleScalar>(lab: &Lab, cfg: &ExperimentConfig) -> Result<ResultTable> {
    let mut table = new_table("truncation-flow", cfg);
    let p = cfg.params;
    let (c, n) = (p.c, p.n);
    let ms = cfg.truncations();
    let zn = cfg.z.zoom(cfg.energy, n);
    let results = lab.run_trials(cfg.trials, |t| -> Result<Vec<f64>> {
        let full = nu_trace_values(&lab.eigenvalues::<T>(&p, t)?, zn);
        ms.iter()
            .map(|&m| Ok((full - nu_trace_values(&truncated_spectrum::<T>(lab, &p, t, m)?, zn)).abs()))
            .collect()
    });
    let ok = successes(results, &mut table)?;
    let trials = ok.len();
    let delta = c / 6.0;
    let mut curve = Vec::new();
    for (k, &m) in ms.iter().enumerate() {
        let d: Vec<f64> = ok.iter().map(|(_, v)| v[k]).collect();
        let (mean, se) = stats::mean_se(&d);
        let row = table.push(c, Some(n), "mean_abs_diff", mean, se, trials);
        row.m = Some(m);
        if m == n && d.iter().any(|&x| x != 0.0) {
            row.flag = "coupling_violation".into();
        }
        table.push(c, Some(n), "reference_log2_bound", 3.0 * (n as f64 - (1.0 + delta) * m as f64), 0.0, 0).m = Some(m);
        if m < n {
            curve.push((m as f64, mean));
        }
    }
    let (slope, se) = log2_slope(&curve);
    table.push(c, Some(n), "fitted_log2_slope", slope, se, trials);
    table.push(c, Some(n), "reference_slope", -3.0 * (1.0 + delta), 0.0, 0);
    curve.sort_by(|a, b| a.0.total_cmp(&b.0));
    let decreasing = curve.windows(2).all(|w| w[1].0 > w[0].0 && w[1].1 < w[0].1);
    table.push(c, Some(n), "strictly_decreasing", f64::from(u8::from(decreasing)), 0.0, trials);
    Ok(finish(table))
}
