//! Monte Carlo experiments over independent trials.
//!
//! Every experiment is a pure function of its [`ExperimentConfig`]: trials
//! draw from substreams keyed by the master seed, run on a bounded worker
//! pool, and are reduced in trial order.

mod basic;
mod common;
mod trial;
pub mod counting;
pub mod delocalization;
pub mod flow;
pub mod localization;
pub mod poisson;
pub mod sweep;

pub use basic::{dos_run, sample_run, spectrum_run, SAMPLE_MATRIX_MAX_LEVEL};
pub use counting::component_counting;
pub use delocalization::delocalization_run;
pub use flow::truncation_flow;
pub use localization::localization_run;
pub use poisson::poisson_test;
pub use sweep::phase_sweep;

use crate::ensemble::{assemble, EnsembleParams, EnsembleScalar, ParamsKey};
use crate::error::{Error, Result};
use crate::spectral::{ComplexEnergy, Factorization, MAX_DIM};
use crate::table::ResultTable;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

/// `2 ln 2 - 1`, the mean gap ratio of a Poisson process.
pub const POISSON_GAP_RATIO: f64 = 0.386_294_361_119_890_6;
/// Mean gap ratio of large GOE spectra.
pub const GOE_GAP_RATIO: f64 = 0.5307;

/// Largest level accepted by experiments.
pub const MAX_EXPERIMENT_LEVEL: u32 = 13;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub params: EnsembleParams,
    pub energy: f64,
    pub trials: usize,
    pub w: f64,
    pub epsilon: f64,
    pub ell_loc: f64,
    pub z: ComplexEnergy,
    /// Truncation level for sampling, spectra and densities; `n` when absent.
    pub m: Option<u32>,
    /// Truncation levels for the flow; empty means `2..n`.
    pub m_list: Vec<u32>,
    /// Levels for sweeps; empty means `[params.n]`.
    pub n_list: Vec<u32>,
    /// Values of `c` for the phase sweep; empty means `[params.c]`.
    pub c_list: Vec<f64>,
    /// Width of the counting box in rescaled units.
    pub box_width: f64,
    /// Sites sampled per trial in localization runs.
    pub sites: usize,
    /// Rescaled half-width of the gap-statistics window; chosen from
    /// `window_target` when absent.
    pub window: Option<f64>,
    pub window_target: usize,
    /// Bulk eigenvectors per trial in delocalization runs.
    pub bulk_vectors: usize,
    pub dos_bins: usize,
    pub dos_range: f64,
    /// Half-width of the box used to estimate the density at `energy`.
    pub bandwidth: f64,
    /// Trials of `H_n` used for the density estimate in component counting.
    pub dos_trials: usize,
    /// Trials whose block spectra are checked against the whole truncated
    /// matrix; all when `n <= 10` and 2 otherwise when absent.
    pub check_trials: Option<usize>,
    pub workers: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            params: EnsembleParams::new(10, 1.0),
            energy: 0.0,
            trials: 100,
            w: 0.2,
            epsilon: 0.25,
            ell_loc: 0.3,
            z: ComplexEnergy { re: 0.0, im: 1.0 },
            m: None,
            m_list: Vec::new(),
            n_list: Vec::new(),
            c_list: Vec::new(),
            box_width: 4.0,
            sites: 8,
            window: None,
            window_target: 256,
            bulk_vectors: 256,
            dos_bins: 40,
            dos_range: 2.5,
            bandwidth: 0.05,
            dos_trials: 20,
            check_trials: None,
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
        }
    }
}

impl ExperimentConfig {
    pub fn levels(&self) -> Vec<u32> {
        if self.n_list.is_empty() {
            vec![self.params.n]
        } else {
            self.n_list.clone()
        }
    }

    pub fn couplings(&self) -> Vec<f64> {
        if self.c_list.is_empty() {
            vec![self.params.c]
        } else {
            self.c_list.clone()
        }
    }

    pub fn truncations(&self) -> Vec<u32> {
        if self.m_list.is_empty() {
            (2.min(self.params.n)..self.params.n).collect()
        } else {
            self.m_list.clone()
        }
    }

    /// `m_n = ceil((1 - epsilon) n)`.
    pub fn m_n(&self, n: u32) -> u32 {
        (((1.0 - self.epsilon) * n as f64) - 1e-12).ceil().max(0.0) as u32
    }

    /// `2 mu = (1 - eps)(3(1 + delta) - 1) - (3(1 + l) - 1) - w` with `delta = c / 6`.
    pub fn two_mu(&self, c: f64) -> f64 {
        two_mu(c, self.w, self.epsilon, self.ell_loc)
    }
}

pub fn two_mu(c: f64, w: f64, epsilon: f64, ell_loc: f64) -> f64 {
    let delta = c / 6.0;
    (1.0 - epsilon) * (3.0 * (1.0 + delta) - 1.0) - (3.0 * (1.0 + ell_loc) - 1.0) - w
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Validation {
    pub violations: Vec<String>,
    pub warnings: Vec<String>,
    pub two_mu: f64,
}

impl Validation {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Range checks plus the localization exponent `2 mu` at `params.c`.
pub fn validate(cfg: &ExperimentConfig) -> Validation {
    let mut v = Vec::new();
    let mut levels = cfg.levels();
    levels.push(cfg.params.n);
    levels.sort_unstable();
    levels.dedup();
    for &n in &levels {
        if n > MAX_EXPERIMENT_LEVEL {
            v.push(format!("n = {n} exceeds {MAX_EXPERIMENT_LEVEL}"));
        }
    }
    for c in cfg.couplings().into_iter().chain([cfg.params.c]) {
        if !c.is_finite() {
            v.push(format!("c = {c} is not finite"));
        }
    }
    if cfg.trials < 1 {
        v.push("trials must be at least 1".into());
    }
    for (name, x) in [("w", cfg.w), ("epsilon", cfg.epsilon), ("ell_loc", cfg.ell_loc)] {
        if !(x > 0.0 && x < 1.0) {
            v.push(format!("{name} = {x} must lie in (0, 1)"));
        }
    }
    if !(cfg.z.im > 0.0) {
        v.push(format!("Im z = {} must be positive", cfg.z.im));
    }
    if !cfg.energy.is_finite() {
        v.push("energy must be finite".into());
    }
    if let Some(m) = cfg.m.filter(|&m| m > cfg.params.n) {
        v.push(format!("truncation level m = {m} exceeds n = {}", cfg.params.n));
    }
    if let Some(&m) = cfg.m_list.iter().find(|&&m| m > cfg.params.n) {
        v.push(format!("truncation level m = {m} exceeds n = {}", cfg.params.n));
    }
    if !(cfg.box_width > 0.0) {
        v.push("box_width must be positive".into());
    }
    if cfg.window.is_some_and(|h| !(h > 0.0)) {
        v.push("window must be positive".into());
    }
    if !(cfg.bandwidth > 0.0) || !(cfg.dos_range > 0.0) || cfg.dos_bins == 0 {
        v.push("density bins, range and bandwidth must be positive".into());
    }
    if cfg.sites == 0 || cfg.window_target < 3 || cfg.bulk_vectors == 0 || cfg.dos_trials == 0 {
        v.push("sites, bulk_vectors and dos_trials must be positive and window_target at least 3".into());
    }
    if cfg.workers == 0 {
        v.push("workers must be at least 1".into());
    }
    let two_mu = cfg.two_mu(cfg.params.c);
    let mut warnings = Vec::new();
    if !(two_mu > 0.0) {
        warnings.push(format!(
            "2mu = {two_mu} <= 0 at c = {}, w = {}, epsilon = {}, ell_loc = {}",
            cfg.params.c, cfg.w, cfg.epsilon, cfg.ell_loc
        ));
    }
    Validation {
        violations: v,
        warnings,
        two_mu,
    }
}

fn require_valid(cfg: &ExperimentConfig) -> Result<()> {
    let v = validate(cfg);
    if v.is_ok() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(v.violations.join("; ")))
    }
}

/// Worker pool plus a cache of eigenvalue lists shared between experiments.
pub struct Lab {
    pool: rayon::ThreadPool,
    cache: Mutex<HashMap<(ParamsKey, u64), Arc<Vec<f64>>>>,
}

impl Lab {
    pub fn new(workers: usize) -> Result<Self> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers.max(1))
            .build()
            .map_err(|e| Error::InvalidParameter(format!("cannot start worker pool: {e}")))?;
        Ok(Lab {
            pool,
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn workers(&self) -> usize {
        self.pool.current_num_threads()
    }

    /// Runs `f` on trials `0..trials`; results come back in trial order.
    pub fn run_trials<R: Send>(&self, trials: usize, f: impl Fn(u64) -> Result<R> + Sync + Send) -> Vec<Result<R>> {
        use rayon::prelude::*;
        self.pool
            .install(|| (0..trials as u64).into_par_iter().map(&f).collect())
    }

    pub fn install<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        self.pool.install(f)
    }

    pub fn cached(&self, params: &EnsembleParams, trial: u64) -> Option<Arc<Vec<f64>>> {
        self.cache.lock().unwrap().get(&(params.key(), trial)).cloned()
    }

    pub fn remember(&self, params: &EnsembleParams, trial: u64, values: &[f64]) -> Arc<Vec<f64>> {
        let mut c = self.cache.lock().unwrap();
        c.entry((params.key(), trial))
            .or_insert_with(|| Arc::new(values.to_vec()))
            .clone()
    }

    pub fn clear_cache(&self) {
        self.cache.lock().unwrap().clear();
    }

    /// Sorted eigenvalues of `H_n` for one trial, from the cache when present.
    pub fn eigenvalues<T: EnsembleScalar>(&self, params: &EnsembleParams, trial: u64) -> Result<Arc<Vec<f64>>> {
        if let Some(v) = self.cached(params, trial) {
            return Ok(v);
        }
        let f = self.factorize::<T>(params, trial)?;
        Ok(self.remember(params, trial, f.eigenvalues()))
    }

    /// Tridiagonal factorization of `H_n`; records its eigenvalues.
    pub fn factorize<T: EnsembleScalar>(&self, params: &EnsembleParams, trial: u64) -> Result<Factorization<T>> {
        if params.dim() > MAX_DIM {
            return Err(Error::out_of_range("n", params.n as i64, 0, MAX_DIM.trailing_zeros() as i64));
        }
        let h = assemble::<T>(params, trial, params.n)?;
        let f = Factorization::new(h)?;
        self.remember(params, trial, f.eigenvalues());
        Ok(f)
    }
}

/// Keeps successful trials, counting numerical failures into the table;
/// other errors abort.
fn successes<R>(results: Vec<Result<R>>, table: &mut ResultTable) -> Result<Vec<(u64, R)>> {
    let mut out = Vec::with_capacity(results.len());
    for (t, r) in results.into_iter().enumerate() {
        match r {
            Ok(v) => out.push((t as u64, v)),
            Err(e) if e.is_numerical() => {
                table.failures += 1;
                table.warn(format!("trial {t}: {e}"));
            }
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

fn new_table(name: &str, cfg: &ExperimentConfig) -> ResultTable {
    ResultTable::new(name, cfg.params.symmetry.as_str(), cfg.params.master_seed)
}

/// Flags every row when trials failed.
fn finish(mut table: ResultTable) -> ResultTable {
    if table.failures > 0 {
        let f = format!("failed_trials={}", table.failures);
        for r in &mut table.rows {
            if r.flag.is_empty() {
                r.flag = f.clone();
            } else {
                r.flag = format!("{};{f}", r.flag);
            }
        }
    }
    table
}

macro_rules! dispatch {
    ($params:expr, $f:ident ( $($arg:expr),* )) => {
        match $params.symmetry {
            $crate::ensemble::Symmetry::Orthogonal => $f::<f64>($($arg),*),
            $crate::ensemble::Symmetry::Unitary => $f::<num_complex::Complex64>($($arg),*),
        }
    };
}
pub(crate) use dispatch;
