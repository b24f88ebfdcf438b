//! `ultrametric-lab`: runs the ensemble experiments from the command line.
//!
//! Each run writes `<out>/<subcommand>.csv`, `<out>/<subcommand>.json` and
//! `<out>/manifest.json`. Exit status is 0 on success, 1 for configuration
//! errors and 2 when numerical failures occurred (partial results are still
//! written, with the affected rows flagged).

pub mod config;

use clap::{Parser, Subcommand};
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use ultrametric_core::experiments::{self, ExperimentConfig, Lab};
use ultrametric_core::table::ResultTable;

pub const OUT_ENV: &str = "ULTRAMETRIC_LAB_OUT";
pub const DEFAULT_OUT: &str = "ultrametric-out";

#[derive(Debug, Parser)]
#[command(name = "ultrametric-lab", version, about = "Monte Carlo laboratory for the ultrametric random matrix ensemble")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Assemble H_{n,m} and report entry moments.
    Sample(RunArgs),
    /// Eigenvalues of H_{n,m}.
    Spectrum(RunArgs),
    /// Density of states of H_{n,m}.
    Dos(RunArgs),
    /// Local level statistics near E.
    PoissonTest(RunArgs),
    /// Counting statistics of the truncated blocks.
    Counting(RunArgs),
    /// Resolvent distance between H_n and its truncations.
    TruncationFlow(RunArgs),
    /// Eigenfunction mass outside balls and resolvent tails.
    Localization(RunArgs),
    /// Bulk eigenvector norms, semicircle distance and gap ratios.
    Delocalization(RunArgs),
    /// Grid over c and n.
    Sweep(RunArgs),
    /// Check a configuration and report 2mu.
    Validate(RunArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Sample(_) => "sample",
            Command::Spectrum(_) => "spectrum",
            Command::Dos(_) => "dos",
            Command::PoissonTest(_) => "poisson-test",
            Command::Counting(_) => "counting",
            Command::TruncationFlow(_) => "truncation-flow",
            Command::Localization(_) => "localization",
            Command::Delocalization(_) => "delocalization",
            Command::Sweep(_) => "sweep",
            Command::Validate(_) => "validate",
        }
    }

    fn args(&self) -> &RunArgs {
        match self {
            Command::Sample(a)
            | Command::Spectrum(a)
            | Command::Dos(a)
            | Command::PoissonTest(a)
            | Command::Counting(a)
            | Command::TruncationFlow(a)
            | Command::Localization(a)
            | Command::Delocalization(a)
            | Command::Sweep(a)
            | Command::Validate(a) => a,
        }
    }
}

macro_rules! overrides {
    ($($field:ident => $key:literal),* $(,)?) => {
        /// Options shared by every subcommand; each mirrors a configuration key.
        #[derive(Debug, Default, clap::Args)]
        pub struct RunArgs {
            /// Configuration file (key = value text, or a previous manifest.json).
            #[arg(long)]
            pub config: Option<PathBuf>,
            /// Master seed; a random seed is drawn and printed when absent.
            #[arg(long)]
            pub seed: Option<u64>,
            /// Output directory (default: $ULTRAMETRIC_LAB_OUT, else ./ultrametric-out).
            #[arg(long)]
            pub out: Option<PathBuf>,
            /// Worker threads (default: available cores).
            #[arg(long)]
            pub workers: Option<String>,
            $(
                #[arg(long, allow_hyphen_values = true, value_name = $key)]
                pub $field: Option<String>,
            )*
        }

        impl RunArgs {
            fn overrides(&self) -> Vec<(&'static str, &str)> {
                let mut v = Vec::new();
                if let Some(x) = &self.workers {
                    v.push(("workers", x.as_str()));
                }
                $(
                    if let Some(x) = &self.$field {
                        v.push(($key, x.as_str()));
                    }
                )*
                v
            }
        }
    };
}

overrides! {
    n => "params.n",
    c => "params.c",
    symmetry => "params.symmetry",
    normalized => "params.normalized",
    energy => "energy",
    trials => "trials",
    w => "w",
    epsilon => "epsilon",
    ell_loc => "ell_loc",
    z_re => "z.re",
    z_im => "z.im",
    m => "m",
    m_list => "m_list",
    n_list => "n_list",
    c_list => "c_list",
    box_width => "box_width",
    sites => "sites",
    window => "window",
    window_target => "window_target",
    bulk_vectors => "bulk_vectors",
    dos_bins => "dos_bins",
    dos_range => "dos_range",
    bandwidth => "bandwidth",
    dos_trials => "dos_trials",
    check_trials => "check_trials",
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl From<ultrametric_core::Error> for CliError {
    fn from(e: ultrametric_core::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Config(e.to_string())
        }
    }
}

fn random_seed() -> u64 {
    use std::hash::{BuildHasher, Hasher};
    let mut h = std::collections::hash_map::RandomState::new().build_hasher();
    let t = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.as_nanos() as u64);
    h.write_u64(t);
    h.write_u32(std::process::id());
    h.finish()
}

/// Resolved configuration: defaults, then the config file, then flags.
/// Returns the config and whether the seed was drawn at random.
pub fn resolve(command: &Command) -> Result<(ExperimentConfig, bool), CliError> {
    let args = command.args();
    let mut cfg = ExperimentConfig::default();
    let mut seeded = false;
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        if text.trim_start().starts_with('{') {
            let m = config::parse_manifest(&text).map_err(CliError::Config)?;
            if m.subcommand != command.name() && command.name() != "validate" {
                return Err(CliError::Config(format!(
                    "manifest was written by '{}', not '{}'",
                    m.subcommand,
                    command.name()
                )));
            }
            cfg = m.config;
            seeded = true;
        } else {
            seeded = config::apply_text(&mut cfg, &text).map_err(CliError::Config)?;
        }
    }
    for (k, v) in args.overrides() {
        config::apply(&mut cfg, k, v).map_err(CliError::Config)?;
    }
    let mut drawn = false;
    if let Some(s) = args.seed {
        cfg.params.master_seed = s;
    } else if !seeded {
        cfg.params.master_seed = random_seed();
        drawn = true;
    }
    Ok((cfg, drawn))
}

pub fn output_dir(args: &RunArgs) -> PathBuf {
    args.out
        .clone()
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

/// Executes one subcommand and returns its tables in CSV and JSON form.
pub fn execute(name: &str, lab: &Lab, cfg: &ExperimentConfig) -> Result<(ResultTable, String, serde_json::Value), CliError> {
    let (table, extra) = match name {
        "sample" => {
            let (t, matrices) = experiments::sample_run(lab, cfg)?;
            (t, (!matrices.is_empty()).then(|| serde_json::json!(matrices)))
        }
        "spectrum" => (experiments::spectrum_run(lab, cfg)?, None),
        "dos" => (experiments::dos_run(lab, cfg)?, None),
        "poisson-test" => (experiments::poisson_test(lab, cfg)?, None),
        "counting" => (experiments::component_counting(lab, cfg)?, None),
        "truncation-flow" => (experiments::truncation_flow(lab, cfg)?, None),
        "localization" => (experiments::localization_run(lab, cfg)?, None),
        "delocalization" => (experiments::delocalization_run(lab, cfg)?, None),
        "sweep" => (experiments::phase_sweep(lab, cfg)?, None),
        other => return Err(CliError::Config(format!("unknown subcommand '{other}'"))),
    };
    let csv = if name == "sweep" { table.to_wide_csv() } else { table.to_csv() };
    let mut json = table.to_json();
    if let Some(x) = extra {
        json["matrices"] = x;
    }
    Ok((table, csv, json))
}

fn write(dir: &Path, file: &str, contents: &str) -> Result<PathBuf, CliError> {
    let p = dir.join(file);
    std::fs::write(&p, contents).map_err(|e| CliError::Config(format!("cannot write {}: {e}", p.display())))?;
    Ok(p)
}

pub fn manifest(name: &str, cfg: &ExperimentConfig) -> serde_json::Value {
    serde_json::json!({
        "tool": "ultrametric-lab",
        "version": env!("CARGO_PKG_VERSION"),
        "subcommand": name,
        "seed": cfg.params.master_seed,
        "config": cfg,
    })
}

fn run_command(command: &Command) -> Result<i32, CliError> {
    let name = command.name();
    let (cfg, drawn) = resolve(command)?;
    if drawn && name != "validate" {
        eprintln!("seed = {}", cfg.params.master_seed);
    }
    let report = experiments::validate(&cfg);
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    if name == "validate" {
        let out = serde_json::json!({
            "violations": report.violations,
            "warnings": report.warnings,
            "two_mu": report.two_mu,
        });
        println!("{}", serde_json::to_string_pretty(&out).unwrap_or_default());
        return Ok(if report.is_ok() { 0 } else { 1 });
    }
    if !report.is_ok() {
        return Err(CliError::Config(report.violations.join("; ")));
    }
    let dir = output_dir(command.args());
    std::fs::create_dir_all(&dir).map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))?;
    let lab = Lab::new(cfg.workers)?;
    let (table, csv, json) = execute(name, &lab, &cfg)?;
    let pretty = |v: &serde_json::Value| serde_json::to_string_pretty(v).unwrap_or_default() + "\n";
    let paths = [
        write(&dir, &format!("{name}.csv"), &csv)?,
        write(&dir, &format!("{name}.json"), &pretty(&json))?,
        write(&dir, "manifest.json", &pretty(&manifest(name, &cfg)))?,
    ];
    for w in &table.warnings {
        eprintln!("warning: {w}");
    }
    for p in &paths {
        eprintln!("wrote {}", p.display());
    }
    if table.failures > 0 {
        eprintln!("{} trial(s) failed numerically; affected rows are flagged", table.failures);
        return Ok(2);
    }
    Ok(0)
}

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run_command(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
