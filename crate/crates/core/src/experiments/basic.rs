use super::{dispatch, finish, new_table, require_valid, successes, ExperimentConfig, Lab};
use crate::ensemble::{assemble, EnsembleScalar};
use crate::error::Result;
use crate::observables::{dos_estimate, dos_l1_to_semicircle, nu_hat, Bins};
use crate::spectral::eigh;
use crate::stats;
use crate::table::ResultTable;

/// Matrices up to this level are also returned entry by entry.
pub const SAMPLE_MATRIX_MAX_LEVEL: u32 = 6;

/// Assembles `H_{n,m}` for each trial and reports entry moments; small
/// matrices are returned in full (column-major, `[re, im]` pairs).
pub fn sample_run(lab: &Lab, cfg: &ExperimentConfig) -> Result<(ResultTable, Vec<Vec<[f64; 2]>>)> {
    require_valid(cfg)?;
    dispatch!(cfg.params, sample(lab, cfg))
}

fn sample<T: EnsembleScalar>(lab: &Lab, cfg: &ExperimentConfig) -> Result<(ResultTable, Vec<Vec<[f64; 2]>>)> {
    let mut table = new_table("sample", cfg);
    let p = cfg.params;
    let m = cfg.m.unwrap_or(p.n);
    let keep = p.n <= SAMPLE_MATRIX_MAX_LEVEL;
    type Out = ([f64; 4], Option<Vec<[f64; 2]>>);
    let results = lab.run_trials(cfg.trials, |t| -> Result<Out> {
        let h = assemble::<T>(&p, t, m)?;
        let dim = h.dim();
        let row_sq: f64 = h.data().iter().map(|e| e.abs2()).sum::<f64>() / dim as f64;
        let stats = [h.trace(), h.max_abs(), row_sq, f64::from(u8::from(h.is_hermitian()))];
        let entries = keep.then(|| h.data().iter().map(|e| [e.re(), e.im()]).collect());
        Ok((stats, entries))
    });
    let ok = successes(results, &mut table)?;
    let c = p.c;
    let mut matrices = Vec::new();
    for (t, (s, e)) in &ok {
        for (k, name) in ["trace", "max_abs", "mean_row_square_sum", "hermitian"].iter().enumerate() {
            let row = table.push(c, Some(p.n), name, s[k], 0.0, 1);
            row.m = Some(m);
            row.trial = Some(*t);
        }
        if let Some(e) = e {
            matrices.push(e.clone());
        }
    }
    let rs: Vec<f64> = ok.iter().map(|(_, (s, _))| s[2]).collect();
    let (mean, se) = stats::mean_se(&rs);
    table.push(c, Some(p.n), "mean_row_square_sum", mean, se, ok.len()).m = Some(m);
    Ok((finish(table), matrices))
}

/// Eigenvalues of `H_{n,m}` for each trial.
pub fn spectrum_run(lab: &Lab, cfg: &ExperimentConfig) -> Result<ResultTable> {
    require_valid(cfg)?;
    dispatch!(cfg.params, spectrum(lab, cfg))
}

fn spectra<T: EnsembleScalar>(lab: &Lab, cfg: &ExperimentConfig, table: &mut ResultTable) -> Result<Vec<(u64, Vec<f64>)>> {
    let p = cfg.params;
    let m = cfg.m.unwrap_or(p.n);
    let results = lab.run_trials(cfg.trials, |t| -> Result<Vec<f64>> {
        if m == p.n {
            Ok(lab.eigenvalues::<T>(&p, t)?.to_vec())
        } else {
            Ok(eigh(assemble::<T>(&p, t, m)?, false)?.into_eigenvalues())
        }
    });
    successes(results, table)
}

fn spectrum<T: EnsembleScalar>(lab: &Lab, cfg: &ExperimentConfig) -> Result<ResultTable> {
    let mut table = new_table("spectrum", cfg);
    let p = cfg.params;
    let m = cfg.m.unwrap_or(p.n);
    for (t, ev) in spectra::<T>(lab, cfg, &mut table)? {
        for (j, &l) in ev.iter().enumerate() {
            let row = table.push(p.c, Some(p.n), "eigenvalue", l, 0.0, 1);
            row.m = Some(m);
            row.trial = Some(t);
            row.index = Some(j as u64);
        }
    }
    Ok(finish(table))
}

/// Trial-averaged density of states of `H_{n,m}`.
pub fn dos_run(lab: &Lab, cfg: &ExperimentConfig) -> Result<ResultTable> {
    require_valid(cfg)?;
    dispatch!(cfg.params, dos(lab, cfg))
}

fn dos<T: EnsembleScalar>(lab: &Lab, cfg: &ExperimentConfig) -> Result<ResultTable> {
    let mut table = new_table("dos", cfg);
    let p = cfg.params;
    let (c, n) = (p.c, Some(p.n));
    let m = cfg.m.unwrap_or(p.n);
    let pool = spectra::<T>(lab, cfg, &mut table)?;
    let values: Vec<&[f64]> = pool.iter().map(|(_, v)| v.as_slice()).collect();
    let trials = values.len();
    let bins = Bins::uniform(-cfg.dos_range, cfg.dos_range, cfg.dos_bins)?;
    let d = dos_estimate(&values, &bins)?;
    for b in 0..bins.len() {
        let e = bins.edges();
        for (name, v, se) in [("bin_lo", e[b], 0.0), ("bin_hi", e[b + 1], 0.0), ("density", d.density[b], d.se[b])] {
            let row = table.push(c, n, name, v, se, trials);
            row.m = Some(m);
            row.index = Some(b as u64);
        }
    }
    table.push(c, n, "captured_fraction", d.captured, 0.0, trials).m = Some(m);
    table.push(c, n, "max_density", d.max_density(), 0.0, trials).m = Some(m);
    let (nu, nu_se) = nu_hat(&values, cfg.energy, cfg.bandwidth)?;
    table.push(c, n, "nu_hat", nu, nu_se, trials).m = Some(m);
    let (l1, l1_se) = dos_l1_to_semicircle(&values, &bins)?;
    table.push(c, n, "dos_l1_semicircle", l1, l1_se, trials).m = Some(m);
    Ok(finish(table))
}
