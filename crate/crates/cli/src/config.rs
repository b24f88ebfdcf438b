//! Flat `key = value` configuration with dotted keys.
//!
//! ```text
//! # comments and blank lines are ignored
//! params.n = 10
//! params.c = 1
//! n_list = 8, 10, 12
//! ```
//!
//! A `manifest.json` written by a previous run is accepted in place of a
//! text file; its `config` object is used as is.

use std::str::FromStr;
use ultrametric_core::experiments::ExperimentConfig;

/// Every key understood by [`apply`].
pub const KEYS: &[&str] = &[
    "params.n",
    "params.c",
    "params.symmetry",
    "params.normalized",
    "params.master_seed",
    "seed",
    "energy",
    "trials",
    "w",
    "epsilon",
    "ell_loc",
    "z.re",
    "z.im",
    "m",
    "m_list",
    "n_list",
    "c_list",
    "box_width",
    "sites",
    "window",
    "window_target",
    "bulk_vectors",
    "dos_bins",
    "dos_range",
    "bandwidth",
    "dos_trials",
    "check_trials",
    "workers",
];

fn parse<T: FromStr>(key: &str, v: &str) -> Result<T, String> {
    v.parse()
        .map_err(|_| format!("invalid value '{v}' for '{key}'"))
}

fn list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>, String> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect()
}

fn boolean(key: &str, v: &str) -> Result<bool, String> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(format!("invalid boolean '{v}' for '{key}'")),
    }
}

/// Sets one key; `none` clears optional fields.
pub fn apply(cfg: &mut ExperimentConfig, key: &str, v: &str) -> Result<(), String> {
    let v = v.trim();
    let optional = |v: &str| v.eq_ignore_ascii_case("none") || v.is_empty();
    match key {
        "params.n" => cfg.params.n = parse(key, v)?,
        "params.c" => cfg.params.c = parse(key, v)?,
        "params.symmetry" => cfg.params.symmetry = v.parse().map_err(|e| format!("{e}"))?,
        "params.normalized" => cfg.params.normalized = boolean(key, v)?,
        "params.master_seed" | "seed" => cfg.params.master_seed = parse(key, v)?,
        "energy" => cfg.energy = parse(key, v)?,
        "trials" => cfg.trials = parse(key, v)?,
        "w" => cfg.w = parse(key, v)?,
        "epsilon" => cfg.epsilon = parse(key, v)?,
        "ell_loc" => cfg.ell_loc = parse(key, v)?,
        "z.re" => cfg.z.re = parse(key, v)?,
        "z.im" => cfg.z.im = parse(key, v)?,
        "m" => cfg.m = if optional(v) { None } else { Some(parse(key, v)?) },
        "m_list" => cfg.m_list = list(key, v)?,
        "n_list" => cfg.n_list = list(key, v)?,
        "c_list" => cfg.c_list = list(key, v)?,
        "box_width" => cfg.box_width = parse(key, v)?,
        "sites" => cfg.sites = parse(key, v)?,
        "window" => cfg.window = if optional(v) { None } else { Some(parse(key, v)?) },
        "window_target" => cfg.window_target = parse(key, v)?,
        "bulk_vectors" => cfg.bulk_vectors = parse(key, v)?,
        "dos_bins" => cfg.dos_bins = parse(key, v)?,
        "dos_range" => cfg.dos_range = parse(key, v)?,
        "bandwidth" => cfg.bandwidth = parse(key, v)?,
        "dos_trials" => cfg.dos_trials = parse(key, v)?,
        "check_trials" => cfg.check_trials = if optional(v) { None } else { Some(parse(key, v)?) },
        "workers" => cfg.workers = parse(key, v)?,
        _ => return Err(format!("unknown configuration key '{key}'")),
    }
    Ok(())
}

/// Applies a `key = value` document on top of `cfg`.
pub fn apply_text(cfg: &mut ExperimentConfig, text: &str) -> Result<bool, String> {
    let mut seeded = false;
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected 'key = value'", no + 1))?;
        let k = k.trim();
        apply(cfg, k, v).map_err(|e| format!("line {}: {e}", no + 1))?;
        seeded |= k == "seed" || k == "params.master_seed";
    }
    Ok(seeded)
}

/// A previously written manifest.
pub struct Manifest {
    pub subcommand: String,
    pub config: ExperimentConfig,
}

pub fn parse_manifest(text: &str) -> Result<Manifest, String> {
    let v: serde_json::Value = serde_json::from_str(text).map_err(|e| format!("manifest: {e}"))?;
    let subcommand = v
        .get("subcommand")
        .and_then(|s| s.as_str())
        .ok_or("manifest: missing 'subcommand'")?
        .to_string();
    let config = serde_json::from_value(v.get("config").cloned().ok_or("manifest: missing 'config'")?)
        .map_err(|e| format!("manifest config: {e}"))?;
    Ok(Manifest { subcommand, config })
}
