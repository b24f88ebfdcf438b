use super::common::log2_slope;
use super::{dispatch, finish, new_table, require_valid, successes, ExperimentConfig, Lab};
use crate::ensemble::{assemble, assemble_block, EnsembleScalar};
use crate::error::{Error, Result};
use crate::observables::nu_hat;
use crate::spectral::eigh;
use crate::stats;
use crate::table::ResultTable;

/// Largest count threshold reported.
pub const MAX_THRESHOLD: usize = 3;

/// `X(n, l) = sum_j P(mu_{m_n, j}(B) >= l)` over the independent diagonal
/// blocks of `H_{n, m_n}`, compared with the density of states of `H_n`.
pub fn component_counting(lab: &Lab, cfg: &ExperimentConfig) -> Result<ResultTable> {
    require_valid(cfg)?;
    dispatch!(cfg.params, run(lab, cfg))
}

struct TrialCounts {
    /// Points of each block inside the box.
    counts: Vec<usize>,
    /// Largest deviation between block and whole-matrix spectra, if checked.
    check: Option<f64>,
}

fn run<T: EnsembleScalar>(lab: &Lab, cfg: &ExperimentConfig) -> Result<ResultTable> {
    let mut table = new_table("counting", cfg);
    let c = cfg.params.c;
    let half = cfg.box_width / 2.0;
    let mut x2_curve = Vec::new();
    for n in cfg.levels() {
        let m = cfg.m_n(n);
        if m == 0 || m >= n {
            return Err(Error::InvalidParameter(format!(
                "m_n = {m} must satisfy 0 < m_n < n = {n} (epsilon = {})",
                cfg.epsilon
            )));
        }
        let p = cfg.params.with_level(n);
        let blocks = 1u64 << (n - m);
        let scale = p.dim() as f64;
        let checked = cfg.check_trials.unwrap_or(if n <= 10 { cfg.trials } else { 2 });
        let results = lab.run_trials(cfg.trials, |t| -> Result<TrialCounts> {
            let mut counts = Vec::with_capacity(blocks as usize);
            let mut union = Vec::new();
            let check = (t as usize) < checked;
            for j in 0..blocks {
                let s = eigh(assemble_block::<T>(&p, t, m, j)?, false)?;
                let ev = s.eigenvalues();
                let lo = ev.partition_point(|&l| scale * (l - cfg.energy) < -half);
                let hi = ev.partition_point(|&l| scale * (l - cfg.energy) < half);
                counts.push(hi - lo);
                if check {
                    union.extend_from_slice(ev);
                }
            }
            let check = if check {
                union.sort_by(f64::total_cmp);
                let whole = eigh(assemble::<T>(&p, t, m)?, false)?;
                Some(
                    whole
                        .eigenvalues()
                        .iter()
                        .zip(&union)
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max),
                )
            } else {
                None
            };
            Ok(TrialCounts { counts, check })
        });
        let ok = successes(results, &mut table)?;
        let trials = ok.len();
        let n_ = Some(n);
        table.push(c, n_, "m_n", m as f64, 0.0, trials).m = Some(m);
        table.push(c, n_, "blocks", blocks as f64, 0.0, trials).m = Some(m);
        let totals: Vec<f64> = ok.iter().map(|(_, r)| r.counts.iter().sum::<usize>() as f64).collect();
        let (tot, tot_se) = stats::mean_se(&totals);
        table.push(c, n_, "mean_box_count", tot, tot_se, trials).m = Some(m);
        let mut x1 = (f64::NAN, f64::NAN);
        for l in 1..=MAX_THRESHOLD {
            let xs: Vec<f64> = ok
                .iter()
                .map(|(_, r)| r.counts.iter().filter(|&&k| k >= l).count() as f64)
                .collect();
            let (v, se) = stats::mean_se(&xs);
            let row = table.push(c, n_, "X", v, se, trials);
            row.m = Some(m);
            row.index = Some(l as u64);
            if l == 1 {
                x1 = (v, se);
            }
            if l == 2 {
                x2_curve.push((n as f64, v));
            }
        }

        let dos_trials = cfg.dos_trials.min(cfg.trials);
        let results = lab.run_trials(dos_trials, |t| lab.eigenvalues::<T>(&p, t));
        let pool = successes(results, &mut table)?;
        let values: Vec<&[f64]> = pool.iter().map(|(_, v)| v.as_slice()).collect();
        let (nu, nu_se) = nu_hat(&values, cfg.energy, cfg.bandwidth).unwrap_or((f64::NAN, f64::NAN));
        table.push(c, n_, "nu_hat", nu, nu_se, values.len());
        let (nb, nb_se) = (nu * cfg.box_width, nu_se * cfg.box_width);
        table.push(c, n_, "nu_hat_times_box", nb, nb_se, values.len());
        table.push(c, n_, "X1_minus_nu_hat_times_box", x1.0 - nb, x1.1.hypot(nb_se), trials).m = Some(m);

        let diffs: Vec<f64> = ok.iter().filter_map(|(_, r)| r.check).collect();
        let worst = diffs.iter().copied().fold(0.0, f64::max);
        let row = table.push(c, n_, "block_check_max_diff", worst, 0.0, diffs.len());
        row.m = Some(m);
        if worst > 1e-10 {
            row.flag = "block_mismatch".into();
            table.warn(format!("block and whole spectra of H_{{{n},{m}}} differ by {worst}"));
        }
    }
    if x2_curve.len() >= 2 {
        let (s, se) = log2_slope(&x2_curve);
        table.push(c, None, "X2_log2_slope_in_n", s, se, cfg.trials);
    }
    Ok(finish(table))
}
