//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use ultrametric_core::ensemble::{assemble, assemble_block, sample_block_matrix, EnsembleParams, RngStream, StreamPath};
use ultrametric_core::experiments::{
    component_counting, delocalization_run, localization_run, poisson_test, truncation_flow, ExperimentConfig, Lab,
};
use ultrametric_core::hierarchy::{distance, HierarchyIndex};
use ultrametric_core::observables::{gap_ratios, rescale, rescale_values, PointSample, SampleMeta};
use ultrametric_core::spectral::direct::{nu_trace_direct, ShiftedLu};
use ultrametric_core::spectral::{eigh, green_entry, nu_trace, nu_trace_values, ComplexEnergy};
use ultrametric_core::table::ResultTable;

const SEED: u64 = 1;

type Outcome = Result<(bool, String), String>;

fn value(t: &ResultTable, stat: &str, n: Option<u32>) -> Result<(f64, f64), String> {
    t.get(stat, n)
        .map(|r| (r.value, r.se))
        .ok_or_else(|| format!("row {stat} missing"))
}

fn config(n: u32, c: f64, trials: usize) -> ExperimentConfig {
    ExperimentConfig {
        params: EnsembleParams::new(n, c).with_seed(SEED),
        trials,
        ..Default::default()
    }
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn geometry() -> Outcome {
    let start = Instant::now();
    let mut mismatches = 0usize;
    for n in 0..=8u32 {
        for x in 1..=1u32 << n {
            for y in 1..=1u32 << n {
                let scan = (0..=n).find(|&r| x.div_ceil(1 << r) == y.div_ceil(1 << r)).unwrap();
                let d = distance(HierarchyIndex::new(x, n).unwrap(), HierarchyIndex::new(y, n).unwrap()).unwrap();
                mismatches += usize::from(d != scan);
            }
        }
    }
    let mut s = RngStream::new(SEED, StreamPath::synthetic(0, 13));
    let mut violations = 0usize;
    let mut draw = || HierarchyIndex::new(s.below(1 << 13) as u32 + 1, 13).unwrap();
    for _ in 0..100_000 {
        let (x, y, z) = (draw(), draw(), draw());
        let (dxy, dyz, dxz) = (distance(x, y).unwrap(), distance(y, z).unwrap(), distance(x, z).unwrap());
        violations += usize::from(dxz > dxy.max(dyz));
    }
    let secs = start.elapsed().as_secs_f64();
    Ok((
        mismatches == 0 && violations == 0 && secs < 10.0,
        format!("{mismatches} distance mismatches at n <= 8, {violations} ultrametric violations in 1e5 triples, {secs:.2} s"),
    ))
}

fn model_moments() -> Outcome {
    let start = Instant::now();
    let trials = 10_000u64;
    let mut worst = 0.0f64;
    for c in [1.0, 0.0, -1.0, -2.0] {
        let p = EnsembleParams::new(4, c).with_seed(SEED);
        let mut sum = [0.0f64; 16];
        let mut sq = [0.0f64; 16];
        for t in 0..trials {
            let h = assemble::<f64>(&p, t, 4).map_err(|e| e.to_string())?;
            for x in 0..16 {
                let v: f64 = (0..16).map(|y| h.get(x, y).powi(2)).sum();
                sum[x] += v;
                sq[x] += v * v;
            }
        }
        for x in 0..16 {
            let mean = sum[x] / trials as f64;
            let se = ((sq[x] / trials as f64 - mean * mean) / trials as f64).sqrt();
            worst = worst.max((mean - 1.0).abs() / se);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Ok((
        worst < 5.0 && secs < 60.0,
        format!("largest row deviation {worst:.2} SE over 64 rows, {secs:.2} s"),
    ))
}

fn block_exactness() -> Outcome {
    let p = EnsembleParams::new(10, 1.0).with_seed(SEED);
    let mut worst = 0.0f64;
    for t in 0..10 {
        let whole = eigh(assemble::<f64>(&p, t, 6).map_err(|e| e.to_string())?, false).map_err(|e| e.to_string())?;
        let mut union = Vec::with_capacity(1024);
        for j in 0..16 {
            let b = assemble_block::<f64>(&p, t, 6, j).map_err(|e| e.to_string())?;
            union.extend(eigh(b, false).map_err(|e| e.to_string())?.into_eigenvalues());
        }
        union.sort_by(f64::total_cmp);
        for (a, b) in whole.eigenvalues().iter().zip(&union) {
            worst = worst.max((a - b).abs());
        }
    }
    Ok((worst <= 1e-10, format!("max deviation {worst:.3e} over 10 trials at (n, m) = (10, 6)")))
}

fn eigensolver() -> Outcome {
    let p = EnsembleParams::new(10, 1.0).with_seed(SEED);
    let dim = 1024usize;
    let (mut worst_rec, mut worst_orth) = (0.0f64, 0.0f64);
    for t in 0..10 {
        let h = assemble::<f64>(&p, t, 10).map_err(|e| e.to_string())?;
        let s = eigh(h.clone(), true).map_err(|e| e.to_string())?;
        let v = s.vectors().ok_or("no vectors")?;
        let lam = s.eigenvalues();
        let cols: Vec<&[f64]> = (0..dim).map(|k| v.column(k)).collect();
        let mut rec = 0.0f64;
        let mut acc = vec![0.0f64; dim];
        for j in 0..dim {
            acc.iter_mut().for_each(|a| *a = 0.0);
            for (k, col) in cols.iter().enumerate() {
                let w = lam[k] * col[j];
                for (a, &x) in acc.iter_mut().zip(col.iter()) {
                    *a += w * x;
                }
            }
            for i in 0..dim {
                rec = rec.max((acc[i] - h.get(i, j)).abs());
            }
        }
        let mut orth = 0.0f64;
        for a in 0..dim {
            for b in 0..=a {
                let dot: f64 = cols[a].iter().zip(cols[b]).map(|(x, y)| x * y).sum();
                orth = orth.max((dot - if a == b { 1.0 } else { 0.0 }).abs());
            }
        }
        worst_rec = worst_rec.max(rec / (h.max_abs() * dim as f64));
        worst_orth = worst_orth.max(orth);
    }
    Ok((
        worst_rec <= 1e-10 && worst_orth <= 1e-10,
        format!("reconstruction {worst_rec:.3e} (relative to |H|_max 2^n), orthonormality {worst_orth:.3e}"),
    ))
}

fn resolvent() -> Outcome {
    let z = ComplexEnergy::new(0.0, 1.0).unwrap();
    let mut scaling = 0.0f64;
    for (t, e) in [(0u64, 0.0), (1, 0.3), (2, -1.1)] {
        let p = EnsembleParams::new(10, 1.0).with_seed(SEED);
        let s = eigh(assemble::<f64>(&p, t, 10).map_err(|e| e.to_string())?, false).map_err(|e| e.to_string())?;
        let sample = rescale(&s, e, None);
        let mu: f64 = sample.points().iter().map(|&x| ultrametric_core::spectral::poisson_kernel(x, z)).sum();
        let nu = nu_trace_values(s.eigenvalues(), z.zoom(e, 10));
        scaling = scaling.max((mu - nu).abs());
    }

    let p = EnsembleParams::new(8, 1.0).with_seed(SEED);
    let h = assemble::<f64>(&p, 0, 8).map_err(|e| e.to_string())?;
    let s = eigh(h.clone(), true).map_err(|e| e.to_string())?;
    let mut resolvent = 0.0f64;
    for zz in [z, ComplexEnergy::new(0.2, 1.0 / 256.0).unwrap()] {
        let lu = ShiftedLu::new(&h, zz);
        for x in [0usize, 100, 255] {
            let col = lu.column(x);
            let xi = HierarchyIndex::from_offset(x, 8).unwrap();
            for (y, d) in col.iter().enumerate() {
                let g = green_entry(&s, xi, HierarchyIndex::from_offset(y, 8).unwrap(), zz).map_err(|e| e.to_string())?;
                resolvent = resolvent.max((g - d).norm());
            }
        }
        resolvent = resolvent.max((nu_trace(&s, zz) - nu_trace_direct(&h, zz)).abs());
    }

    let cfg = ExperimentConfig {
        m_list: vec![10],
        ..config(10, 1.0, 10)
    };
    let flow = truncation_flow(&Lab::new(cfg.workers).map_err(|e| e.to_string())?, &cfg).map_err(|e| e.to_string())?;
    let at_n = flow
        .select("mean_abs_diff", Some(10))
        .find(|r| r.m == Some(10))
        .map(|r| r.value)
        .ok_or("flow row missing")?;
    Ok((
        scaling <= 1e-12 && resolvent <= 1e-8 && at_n == 0.0,
        format!("zoom identity {scaling:.3e}, spectral vs direct resolvent {resolvent:.3e}, flow at m = n: {at_n}"),
    ))
}

fn exponential_oracle() -> f64 {
    let mut s = RngStream::new(SEED, StreamPath::synthetic(1, 0));
    let mut x = 0.0;
    let points: Vec<f64> = (0..1_000_002)
        .map(|_| {
            x += s.exponential();
            x
        })
        .collect();
    let sample = PointSample::new(
        points,
        SampleMeta {
            trial: 0,
            energy: 0.0,
            scale: 1.0,
            half_width: f64::INFINITY,
        },
    );
    let r = gap_ratios(&sample).unwrap();
    r.sum() / r.values.len() as f64
}

fn goe_oracle() -> f64 {
    let mut ratios = Vec::new();
    for t in 0..40 {
        let m = sample_block_matrix::<f64>(10, 10, SEED, 10_000 + t).unwrap();
        let ev = eigh(m, false).unwrap().into_eigenvalues();
        ratios.extend(gap_ratios(&rescale_values(&ev, 0.0, Some(1024.0 * 0.5), t)).unwrap().values);
    }
    ratios.iter().sum::<f64>() / ratios.len() as f64
}

fn poisson_side(lab: &Lab) -> Outcome {
    let cfg = config(12, 1.0, 100);
    let t = poisson_test(lab, &cfg).map_err(|e| e.to_string())?;
    let (r, r_se) = value(&t, "gap_ratio_mean", Some(12))?;
    let (disp, disp_se) = value(&t, "box_dispersion", Some(12))?;
    let oracle = exponential_oracle();
    Ok((
        (r - oracle).abs() <= 0.02 && (0.8..=1.25).contains(&disp),
        format!("gap ratio {r:.4} +- {r_se:.4} vs oracle {oracle:.4}, dispersion {disp:.3} +- {disp_se:.3}"),
    ))
}

fn goe_side(lab: &Lab) -> Outcome {
    let cfg = config(10, -2.0, 100);
    let t = delocalization_run(lab, &cfg).map_err(|e| e.to_string())?;
    let (r, r_se) = value(&t, "gap_ratio_mean", Some(10))?;
    let (l1, l1_se) = value(&t, "dos_l1_semicircle", Some(10))?;
    let (ipr, ipr_se) = value(&t, "median_ipr_scaled", Some(10))?;
    let oracle = goe_oracle();
    Ok((
        (r - oracle).abs() <= 0.02 && l1 < 0.05 && (2.0..=4.0).contains(&ipr),
        format!(
            "gap ratio {r:.4} +- {r_se:.4} vs oracle {oracle:.4}, DOS L1 {l1:.4} +- {l1_se:.4}, median ipr 2^n {ipr:.3} +- {ipr_se:.3}"
        ),
    ))
}

fn localization(lab: &Lab) -> Outcome {
    let mut medians = Vec::new();
    for c in [1.0, -2.0] {
        let cfg = ExperimentConfig {
            n_list: vec![8, 10, 12],
            ..config(12, c, 100)
        };
        let t = localization_run(lab, &cfg).map_err(|e| e.to_string())?;
        let m: Vec<f64> = [8, 10, 12]
            .iter()
            .map(|&n| value(&t, "median_mass", Some(n)).map(|v| v.0))
            .collect::<Result<_, _>>()?;
        medians.push(m);
    }
    let localized = strictly_decreasing(&medians[0]);
    let g = &medians[1];
    let extended = g.windows(2).all(|w| w[1] >= w[0]) || g.iter().all(|&v| (0.1..=10.0).contains(&v));
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(", ");
    Ok((
        localized && extended,
        format!(
            "median mass at n = 8, 10, 12: c = 1 [{}], c = -2 [{}]",
            fmt(&medians[0]),
            fmt(&medians[1])
        ),
    ))
}

fn flow(lab: &Lab) -> Outcome {
    let cfg = ExperimentConfig {
        m_list: (2..=9).collect(),
        ..config(10, 1.0, 50)
    };
    let t = truncation_flow(lab, &cfg).map_err(|e| e.to_string())?;
    let mut rows: Vec<_> = t.select("mean_abs_diff", Some(10)).collect();
    rows.sort_by_key(|r| r.m);
    let curve: Vec<f64> = rows.iter().map(|r| r.value).collect();
    let (slope, slope_se) = value(&t, "fitted_log2_slope", Some(10))?;
    let decreasing = strictly_decreasing(&curve);
    let fmt = curve.iter().map(|x| format!("{x:.2e}")).collect::<Vec<_>>().join(", ");
    Ok((
        decreasing && slope <= -1.0,
        format!("mean difference over m = 2..9 [{fmt}], decreasing {decreasing}, log2 slope {slope:.3} +- {slope_se:.3}"),
    ))
}

fn counting(lab: &Lab) -> Outcome {
    let cfg = ExperimentConfig {
        n_list: vec![8, 10, 12],
        dos_trials: 100,
        ..config(12, 1.0, 100)
    };
    let t = component_counting(lab, &cfg).map_err(|e| e.to_string())?;
    let x = |n: u32, l: u64| {
        t.select("X", Some(n))
            .find(|r| r.index == Some(l))
            .map(|r| (r.value, r.se))
            .ok_or_else(|| format!("X({n},{l}) missing"))
    };
    let x2: Vec<f64> = [8, 10, 12].iter().map(|&n| x(n, 2).map(|v| v.0)).collect::<Result<_, _>>()?;
    let (x1, x1_se) = x(12, 1)?;
    let (nb, nb_se) = value(&t, "nu_hat_times_box", Some(12))?;
    let se = x1_se.hypot(nb_se);
    let decreasing = strictly_decreasing(&x2);
    Ok((
        decreasing && (x1 - nb).abs() <= 3.0 * se,
        format!(
            "X(n,2) at n = 8, 10, 12 [{:.4}, {:.4}, {:.4}], X(12,1) {x1:.4} vs nu_hat |B| {nb:.4} (difference {:.2} SE)",
            x2[0],
            x2[1],
            x2[2],
            (x1 - nb) / se
        ),
    ))
}

fn lab_binary(args: &[&str], out: &Path) -> Result<(), String> {
    let o = Command::new(env!("CARGO_BIN_EXE_ultrametric-lab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .map_err(|e| e.to_string())?;
    if o.status.success() {
        Ok(())
    } else {
        Err(format!("{args:?}: {}", String::from_utf8_lossy(&o.stderr)))
    }
}

fn determinism() -> Outcome {
    let runs: [(&str, &[&str]); 9] = [
        ("sample", &["--n", "4"]),
        ("spectrum", &["--n", "6"]),
        ("dos", &["--n", "7", "--m", "5"]),
        ("poisson-test", &["--n", "8", "--window-target", "32"]),
        ("counting", &["--n", "8", "--n-list", "7,8"]),
        ("truncation-flow", &["--n", "7"]),
        ("localization", &["--n", "7", "--n-list", "6,7"]),
        ("delocalization", &["--n", "7", "--bulk-vectors", "32", "--window-target", "32"]),
        ("sweep", &["--n", "6", "--c-list", "1,-2", "--n-list", "5,6", "--bulk-vectors", "16", "--window-target", "16"]),
    ];
    let mut differing = Vec::new();
    for (name, extra) in runs {
        let a = tempfile::tempdir().map_err(|e| e.to_string())?;
        let b = tempfile::tempdir().map_err(|e| e.to_string())?;
        let mut args = vec![name, "--trials", "12", "--seed", "7", "--workers", "1"];
        args.extend_from_slice(extra);
        lab_binary(&args, a.path())?;
        let manifest = a.path().join("manifest.json");
        lab_binary(&[name, "--config", manifest.to_str().unwrap(), "--workers", "8"], b.path())?;
        let file = format!("{name}.csv");
        let first = std::fs::read(a.path().join(&file)).map_err(|e| e.to_string())?;
        let second = std::fs::read(b.path().join(&file)).map_err(|e| e.to_string())?;
        if first != second {
            differing.push(name);
        }
    }
    Ok((
        differing.is_empty(),
        if differing.is_empty() {
            "9 subcommands rerun from their manifests with 8 workers: CSV byte-identical".to_string()
        } else {
            format!("CSV differs for {differing:?}")
        },
    ))
}

fn report(number: usize, title: &str, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        Err(e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panic".into()))
    });
    let secs = start.elapsed().as_secs_f64();
    let (pass, detail) = match outcome {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    println!(
        "criterion {number:>2} {} {title}: {detail} [{secs:.1} s]",
        if pass { "PASS" } else { "FAIL" }
    );
    pass
}

fn main() {
    let lab = Lab::new(ExperimentConfig::default().workers).expect("thread pool");
    let mut results = vec![
        report(1, "geometry", geometry),
        report(2, "model moments", model_moments),
        report(3, "block decomposition", block_exactness),
        report(4, "eigensolver", eigensolver),
        report(5, "resolvent identities", resolvent),
    ];
    let loc = report(8, "localization trend", || localization(&lab));
    results.push(report(6, "poisson side", || poisson_side(&lab)));
    results.push(report(7, "orthogonal side", || goe_side(&lab)));
    results.push(loc);
    results.push(report(9, "truncation flow", || flow(&lab)));
    results.push(report(10, "counting hypotheses", || counting(&lab)));
    results.push(report(11, "determinism", determinism));
    let passed = results.iter().filter(|&&p| p).count();
    println!("acceptance: {passed} of {} criteria passed", results.len());
    if passed != results.len() && std::env::var_os("ACCEPTANCE_STRICT").is_some() {
        std::process::exit(1);
    }
}
