use std::path::Path;
use std::process::{Command, Output};

fn lab(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ultrametric-lab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn writes_table_json_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = lab(&["spectrum", "--n", "4", "--trials", "2", "--seed", "5"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(&dir.path().join("spectrum.csv"));
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "experiment,symmetry,seed,c,n,m,trial,index,statistic,value,se,trials,flag"
    );
    assert_eq!(lines.filter(|l| l.contains(",eigenvalue,")).count(), 32);
    let json: serde_json::Value = serde_json::from_str(&read(&dir.path().join("spectrum.json"))).unwrap();
    assert_eq!(json["experiment"], "spectrum");
    let manifest: serde_json::Value = serde_json::from_str(&read(&dir.path().join("manifest.json"))).unwrap();
    assert_eq!(manifest["subcommand"], "spectrum");
    assert_eq!(manifest["seed"], 5);
}

#[test]
fn manifest_rerun_is_byte_identical_across_worker_counts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let o = lab(
        &["localization", "--n", "6", "--n-list", "5,6", "--trials", "6", "--seed", "3", "--workers", "1"],
        a.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let manifest = a.path().join("manifest.json");
    let o = lab(
        &["localization", "--config", manifest.to_str().unwrap(), "--workers", "8"],
        b.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read(&a.path().join("localization.csv")), read(&b.path().join("localization.csv")));
}

#[test]
fn key_value_config_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# small run\nparams.n = 5\ntrials = 3\nseed = 9\nparams.c = -1\n").unwrap();
    let o = lab(&["dos", "--config", cfg.to_str().unwrap(), "--trials", "2"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let manifest: serde_json::Value = serde_json::from_str(&read(&dir.path().join("manifest.json"))).unwrap();
    assert_eq!(manifest["config"]["trials"], 2);
    assert_eq!(manifest["config"]["params"]["n"], 5);
    assert_eq!(manifest["seed"], 9);
}

#[test]
fn configuration_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(lab(&["spectrum", "--no-such-flag", "1"], dir.path()).status.code(), Some(1));
    assert_eq!(lab(&["spectrum", "--n", "20", "--seed", "1"], dir.path()).status.code(), Some(1));
    assert_eq!(lab(&["spectrum", "--trials", "abc", "--seed", "1"], dir.path()).status.code(), Some(1));
    assert_eq!(lab(&["spectrum", "--config", "/nonexistent/cfg", "--seed", "1"], dir.path()).status.code(), Some(1));
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "unknown_key = 3\n").unwrap();
    assert_eq!(lab(&["spectrum", "--config", cfg.to_str().unwrap()], dir.path()).status.code(), Some(1));
    assert_eq!(lab(&["validate", "--n", "20"], dir.path()).status.code(), Some(1));
    assert_eq!(lab(&["validate", "--n", "8"], dir.path()).status.code(), Some(0));
}

#[test]
fn manifest_from_another_subcommand_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(lab(&["spectrum", "--n", "3", "--trials", "1", "--seed", "1"], dir.path()).status.code(), Some(0));
    let m = dir.path().join("manifest.json");
    assert_eq!(lab(&["dos", "--config", m.to_str().unwrap()], dir.path()).status.code(), Some(1));
}

#[test]
fn missing_seed_is_drawn_and_reported() {
    let dir = tempfile::tempdir().unwrap();
    let o = lab(&["sample", "--n", "3", "--trials", "1"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let err = String::from_utf8_lossy(&o.stderr);
    let printed: u64 = err
        .lines()
        .find_map(|l| l.strip_prefix("seed = "))
        .expect("seed printed")
        .trim()
        .parse()
        .unwrap();
    let manifest: serde_json::Value = serde_json::from_str(&read(&dir.path().join("manifest.json"))).unwrap();
    assert_eq!(manifest["seed"], printed);
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_ultrametric-lab"))
        .args(["spectrum", "--n", "3", "--trials", "1", "--seed", "2"])
        .env(ultrametric_cli::OUT_ENV, dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(dir.path().join("spectrum.csv").exists());
}

#[test]
fn sweep_writes_one_line_per_cell() {
    let dir = tempfile::tempdir().unwrap();
    let o = lab(
        &[
            "sweep", "--c-list", "1,-2", "--n-list", "5", "--n", "5", "--trials", "3", "--seed", "4",
            "--window-target", "8", "--bulk-vectors", "8",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(&dir.path().join("sweep.csv"));
    let header = csv.lines().next().unwrap();
    for s in ["gap_ratio_mean", "median_ipr_scaled", "median_mass"] {
        assert!(header.contains(s));
    }
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn flow_at_full_truncation_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let o = lab(
        &["truncation-flow", "--n", "5", "--m-list", "5", "--trials", "2", "--seed", "8"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(&dir.path().join("truncation-flow.csv"));
    let row = csv.lines().find(|l| l.contains(",mean_abs_diff,")).unwrap();
    let value = row.split(',').nth(9).unwrap();
    assert_eq!(value, "0");
}

#[test]
fn help_exits_zero() {
    let o = Command::new(env!("CARGO_BIN_EXE_ultrametric-lab")).arg("--help").output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8_lossy(&o.stdout);
    for sub in ["sample", "poisson-test", "truncation-flow", "sweep", "validate"] {
        assert!(text.contains(sub));
    }
}
