//! Acceptance suite: one PASS / FAIL / SKIP line per criterion.
//!
//! Runs as a plain binary (`cargo test --test acceptance`). The process
//! fails when a criterion outside `KNOWN_SHORTFALLS` fails; shortfalls are
//! still reported as FAIL. Criterion 9's full-dataset half needs
//! `QFUSION_DATA_DIR`; its committed mini-fixture half always runs.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qfusion::bounds::{self, BoundQuery, Strategy};
use qfusion::datasets::{self, IntelConfig, IntelPaths};
use qfusion::fusion::{self, Interval, OverlapRegion};
use qfusion::montecarlo::{self, ExperimentConfig, Method};

/// Criteria that fail with a documented analysis (README, "Known shortfalls").
const KNOWN_SHORTFALLS: &[u8] = &[4];

#[derive(Clone, Copy, PartialEq)]
enum Status {
    Pass,
    Fail,
    Skip,
}

struct Outcome {
    status: Status,
    detail: String,
}

fn verdict(ok: bool, detail: String) -> Outcome {
    Outcome {
        status: if ok { Status::Pass } else { Status::Fail },
        detail,
    }
}

fn rel_close(x: f64, want: f64, tol: f64) -> bool {
    ((x - want) / want).abs() <= tol
}

/// True when `x` printed at the digits of `printed` reads as `printed`.
fn matches_printed(x: f64, printed: &str) -> bool {
    let decimals = printed.split_once('.').map_or(0, |(_, d)| d.len());
    format!("{x:.decimals$}") == printed
}

// 1 ------------------------------------------------------------------------

fn criterion_1() -> Outcome {
    let (n, eta) = (1000u32, 0.1);
    // independent closed forms
    let hl_oracle = 1.0 / (2.0 * eta * (n as f64).sqrt() * 8.0);
    let sql_oracle = 1.0 / (2.0 * eta * (n as f64 * 8.0).sqrt());
    let hl = bounds::hl_variance(n, eta, 8).sqrt();
    let sql = bounds::sql_variance(n, eta, 8).sqrt();
    let gain = bounds::metrological_gain_db(18);
    let a10 = bounds::outlier_advantage_db(10, 2).unwrap();
    let a20 = bounds::outlier_advantage_db(20, 4).unwrap();
    let adv_oracle = 20.0 * (6.0f64 / 8.0).log10();
    let ok = rel_close(hl, hl_oracle, 1e-6)
        && rel_close(sql, sql_oracle, 1e-6)
        && rel_close(gain, 10.0 * 18f64.log10(), 1e-6)
        && rel_close(a10, adv_oracle, 1e-6)
        && rel_close(a20, a10, 1e-12)
        && matches_printed(hl, "0.019764")
        && matches_printed(sql, "0.055902")
        && matches_printed(gain, "12.553")
        && matches_printed(a10.abs(), "2.4988");
    verdict(
        ok,
        format!("hl={hl:.7} sql={sql:.7} gain(18)={gain:.4} dB advantage(10,2)={a10:.5} advantage(20,4)={a20:.5}"),
    )
}

// 2 ------------------------------------------------------------------------

fn criterion_2() -> Outcome {
    let data = datasets::eight_sensor_dataset();
    let ivs: Vec<Interval> = data.iter().map(|s| s.interval()).collect();
    let fused = fusion::brooks_iyengar_fuse(&ivs).unwrap();
    let centers: Vec<f64> = data.iter().map(|s| s.center).collect();
    let avg = fusion::simple_average(&centers).unwrap();
    let mut order: Vec<usize> = (0..ivs.len()).collect();
    order.sort_by(|&a, &b| fused.scores[a].total_cmp(&fused.scores[b]));
    let lowest: BTreeSet<usize> = order[..2].iter().copied().collect();
    let ok = (fused.estimate - 2.275).abs() < 1e-12
        && fused.max_count == 6
        && (avg - 2.775).abs() < 1e-12
        && lowest == BTreeSet::from([0, 4])
        && fused.scores[0] < 0.5
        && fused.scores[4] < 0.5
        && [1, 3, 5, 7].iter().all(|&i| fused.scores[i] >= 0.5)
        // the two lowest are strictly below everything else
        && fused.scores[order[1]] < fused.scores[order[2]];
    verdict(
        ok,
        format!(
            "estimate={} max_count={} average={} scores={:?}",
            fused.estimate,
            fused.max_count,
            avg,
            fused.scores.iter().map(|s| (s * 1e4).round() / 1e4).collect::<Vec<_>>()
        ),
    )
}

// 3 ------------------------------------------------------------------------

fn slopes(stats: &[montecarlo::TrialStats], method: Method) -> f64 {
    let pts: Vec<(f64, f64)> = stats
        .iter()
        .filter(|s| s.method == method)
        .map(|s| (s.sensors as f64, s.rmse))
        .collect();
    montecarlo::fit_loglog_slope(&pts).unwrap()
}

fn criterion_3() -> Outcome {
    let cfg = ExperimentConfig {
        trials: 10_000,
        sensor_counts: vec![2, 4, 8, 16, 32, 64],
        methods: vec![Method::Naive, Method::BrooksIyengar, Method::Entangled],
        visibility: 1.0,
        ..Default::default()
    };
    let t = Instant::now();
    let stats = montecarlo::run_experiment(&cfg).unwrap();
    let secs = t.elapsed().as_secs_f64();
    let (n, bi, e) = (
        slopes(&stats, Method::Naive),
        slopes(&stats, Method::BrooksIyengar),
        slopes(&stats, Method::Entangled),
    );
    let classical = |s: f64| (-0.55..=-0.45).contains(&s);
    verdict(
        classical(n) && classical(bi) && (-1.05..=-0.95).contains(&e),
        format!("slopes naive={n:.4} brooks_iyengar={bi:.4} entangled={e:.4} ({secs:.1} s)"),
    )
}

// 4 ------------------------------------------------------------------------

fn criterion_4() -> Outcome {
    let cfg = ExperimentConfig {
        trials: 10_000,
        sensor_counts: vec![8, 16, 32, 64],
        fault_fraction: 0.2,
        methods: vec![Method::Naive, Method::BrooksIyengar, Method::Outlier],
        ..Default::default()
    };
    let stats = montecarlo::run_experiment(&cfg).unwrap();
    let rmse = |m: Method, k: usize| stats.iter().find(|s| s.method == m && s.sensors == k).unwrap().rmse;
    let mut ok = true;
    let mut parts = Vec::new();
    for &k in &cfg.sensor_counts {
        let naive = rmse(Method::Naive, k);
        let bi = rmse(Method::BrooksIyengar, k);
        let out = rmse(Method::Outlier, k);
        let over_bi = 20.0 * (naive / bi).log10();
        let over_out = 20.0 * (naive / out).log10();
        let margin = 20.0 * (bi / out).log10();
        ok &= over_bi >= 6.0 && over_out >= 6.0 && (1.0..=6.0).contains(&margin);
        parts.push(format!(
            "M={k} f={}: naive-bi={over_bi:.1} naive-outlier={over_out:.1} outlier-over-bi={margin:.2}",
            cfg.faults_for(k)
        ));
    }
    verdict(ok, format!("dB {}", parts.join("; ")))
}

// 5 ------------------------------------------------------------------------

fn criterion_5() -> Outcome {
    let mut configs = 0;
    let mut violations = Vec::new();
    let mut against_outlier = 0;
    for &m in &[4usize, 8, 16, 32] {
        let faults: BTreeSet<usize> = [0.0, 0.1, 0.2].iter().map(|p| (p * m as f64).floor() as usize).collect();
        for &f in &faults {
            for &v in &[0.0, 0.5, 0.9, 1.0] {
                for strategy in [Strategy::Bft, Strategy::Outlier] {
                    let cfg = ExperimentConfig {
                        trials: 10_000,
                        sensor_counts: vec![m],
                        fault_fraction: f as f64 / m as f64,
                        visibility: v,
                        strategy,
                        methods: Method::ALL.to_vec(),
                        seed: 1000 + configs as u64,
                        ..Default::default()
                    };
                    assert_eq!(cfg.faults_for(m), f);
                    configs += 1;
                    for s in montecarlo::run_experiment(&cfg).unwrap() {
                        let mut q: BoundQuery = cfg.bound_query(m, s.method.bound_strategy(strategy));
                        if s.method != Method::Entangled {
                            q.visibility = 0.0;
                        }
                        let floor = bounds::unified_bound(&q).unwrap().mse_lower;
                        if s.mse < floor - 3.0 * s.mse_stderr {
                            violations.push(format!(
                                "{}@M={m},f={f},V={v},{}: mse={:.3e} bound={floor:.3e}",
                                s.method.name(),
                                q.strategy.name(),
                                s.mse
                            ));
                        }
                        let mut q_out = q;
                        q_out.strategy = Strategy::Outlier;
                        let floor_out = bounds::unified_bound(&q_out).unwrap().mse_lower;
                        if s.mse < floor_out - 3.0 * s.mse_stderr {
                            against_outlier += 1;
                        }
                    }
                }
            }
        }
    }
    let shown: Vec<&str> = violations.iter().take(4).map(String::as_str).collect();
    verdict(
        configs >= 50 && violations.is_empty(),
        format!(
            "{configs} configs, {} violations [{}{}]; against the M-f bound: {against_outlier} violations",
            violations.len(),
            shown.join("; "),
            if violations.len() > shown.len() { "; ..." } else { "" }
        ),
    )
}

// 6 ------------------------------------------------------------------------

fn criterion_6() -> Outcome {
    let (n, eta) = (1000u32, 0.1);
    let q = |m: usize, f: usize, v: f64, s: Strategy| {
        bounds::unified_bound(&BoundQuery {
            atoms: n,
            sensitivity: eta,
            sensors: m,
            faults: f,
            visibility: v,
            strategy: s,
        })
    };
    let mut ok = true;
    let mut checks = 0;
    for m in [3usize, 4, 7, 10, 16, 31, 64] {
        let sql = 1.0 / (4.0 * n as f64 * eta * eta * m as f64);
        let hl = sql / m as f64;
        let same = |a: f64, b: f64| ((a - b) / b).abs() < 4.0 * f64::EPSILON;
        // V = 0, f = 0 -> SQL; V = 1, f = 0 -> HL
        ok &= same(q(m, 0, 0.0, Strategy::Bft).unwrap().mse_lower, sql);
        ok &= same(q(m, 0, 1.0, Strategy::Bft).unwrap().mse_lower, hl);
        let fmax = (m - 1) / 3;
        if fmax >= 1 {
            // V = 1 with faults -> HL at M - 2f (BFT) and M - f (outlier)
            let hl_at = |k: usize| 1.0 / (4.0 * n as f64 * eta * eta * (k * k) as f64);
            ok &= same(q(m, fmax, 1.0, Strategy::Bft).unwrap().mse_lower, hl_at(m - 2 * fmax));
            ok &= same(q(m, fmax, 1.0, Strategy::Outlier).unwrap().mse_lower, hl_at(m - fmax));
            for f in 1..=fmax {
                for v in [0.0, 0.3, 0.8, 1.0] {
                    ok &= q(m, f, v, Strategy::Outlier).unwrap().mse_lower
                        <= q(m, f, v, Strategy::Bft).unwrap().mse_lower;
                    checks += 1;
                }
            }
        }
        let mut prev = f64::INFINITY;
        for i in 0..=20 {
            let b = q(m, 0, i as f64 / 20.0, Strategy::Bft).unwrap().mse_lower;
            ok &= b < prev;
            prev = b;
            checks += 1;
        }
    }
    let mut prev = f64::INFINITY;
    for m in 1..=40 {
        let b = bounds::mse_bound(n, eta, m, 0.7);
        ok &= b < prev;
        prev = b;
    }
    verdict(ok, format!("four limiting cases at 7 sizes; {checks} ordering checks"))
}

// 7 ------------------------------------------------------------------------

fn criterion_7() -> Outcome {
    let fracs = [0.0, 0.1, 0.2];
    let taus = [0.0, 0.15, 0.3];
    let seeds = [42u64, 7, 2024];
    let mut grids = Vec::new();
    for &seed in &seeds {
        let mut g = [[0.0; 3]; 3];
        for (i, &p) in fracs.iter().enumerate() {
            for (j, &tau) in taus.iter().enumerate() {
                let cfg = ExperimentConfig {
                    trials: 200_000,
                    sensor_counts: vec![10],
                    fault_fraction: p,
                    tau_prep: tau,
                    seed,
                    ..Default::default()
                };
                g[i][j] = montecarlo::empirical_crossover(&cfg, Strategy::Bft).unwrap().v_star;
            }
        }
        grids.push(g);
    }
    let mut monotone = true;
    for g in &grids {
        for i in 0..3 {
            for j in 0..3 {
                if i > 0 {
                    monotone &= g[i][j] >= g[i - 1][j];
                }
                if j > 0 {
                    monotone &= g[i][j] >= g[i][j - 1];
                }
            }
        }
    }
    let mut spread: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let vals: Vec<f64> = grids.iter().map(|g| g[i][j]).collect();
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            spread = vals.iter().fold(spread, |s, v| s.max((v - mean).abs()));
        }
    }
    let row = |g: &[[f64; 3]; 3]| format!("{:.3}/{:.3}/{:.3}", g[2][0], g[2][1], g[2][2]);
    verdict(
        monotone && spread <= 0.02,
        format!(
            "M=10 f/M=0.2 V* over tau 0/0.15/0.3 per seed: {}; max deviation from seed mean {spread:.4}",
            grids.iter().map(row).collect::<Vec<_>>().join(", ")
        ),
    )
}

// 8 ------------------------------------------------------------------------

/// Regions of maximal overlap found by counting intervals at every
/// eighth-unit grid point; endpoints lie on quarter units, so the grid hits
/// every endpoint and the interior of every elementary segment.
fn grid_oracle(ivs: &[Interval], lo: i32, hi: i32) -> Vec<(f64, f64, usize)> {
    let xs: Vec<f64> = (lo * 8..=hi * 8).map(|k| k as f64 / 8.0).collect();
    let counts: Vec<usize> = xs
        .iter()
        .map(|&x| ivs.iter().filter(|i| i.lower <= x && x <= i.upper).count())
        .collect();
    let max = *counts.iter().max().unwrap();
    let mut out = Vec::new();
    let mut start = None;
    for (k, &c) in counts.iter().enumerate() {
        match (c == max, start) {
            (true, None) => start = Some(k),
            (false, Some(s)) => {
                out.push((xs[s], xs[k - 1], max));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((xs[s], *xs.last().unwrap(), max));
    }
    out
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut mismatches = 0;
    for _ in 0..100 {
        let m = rng.random_range(1..=12);
        let ivs: Vec<Interval> = (0..m)
            .map(|_| {
                let a = rng.random_range(-20i32..20);
                let w = rng.random_range(0i32..16);
                Interval::new(a as f64 / 4.0, (a + w) as f64 / 4.0).unwrap()
            })
            .collect();
        let sweep: Vec<(f64, f64, usize)> = fusion::max_overlap_regions(&ivs)
            .unwrap()
            .into_iter()
            .map(|OverlapRegion { interval, count }| (interval.lower, interval.upper, count))
            .collect();
        if sweep != grid_oracle(&ivs, -6, 10) {
            mismatches += 1;
        }
    }
    verdict(mismatches == 0, format!("100 random sets, {mismatches} mismatches"))
}

// 9 ------------------------------------------------------------------------

fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn qfusion(out: &Path, args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_qfusion"))
        .arg("--out")
        .arg(out)
        .args(args)
        .env_remove("QFUSION_DATA_DIR")
        .output()
        .expect("spawn qfusion")
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance").join(name);
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn criterion_9_fixture() -> Outcome {
    let out = scratch("intel_mini");
    let data = manifest_dir().join("../core/tests/fixtures/intel_mini");
    let o = qfusion(&out, &["--data-dir", data.to_str().unwrap(), "intel", "--clusters", "2"]);
    if !o.status.success() {
        return verdict(false, format!("intel failed: {}", String::from_utf8_lossy(&o.stderr)));
    }
    let golden = manifest_dir().join("tests/fixtures/intel_mini_golden");
    let differing: Vec<&str> = ["intel_summary.json", "intel_clusters.csv"]
        .into_iter()
        .filter(|f| fs::read(out.join(f)).ok() != fs::read(golden.join(f)).ok())
        .collect();
    verdict(
        differing.is_empty(),
        if differing.is_empty() {
            "mini fixture matches golden output".into()
        } else {
            format!("mini fixture differs from golden in {differing:?}")
        },
    )
}

fn criterion_9_full() -> Outcome {
    let Some(dir) = std::env::var_os("QFUSION_DATA_DIR") else {
        return Outcome {
            status: Status::Skip,
            detail: "QFUSION_DATA_DIR not set; full Intel dataset absent".into(),
        };
    };
    let paths = IntelPaths::in_dir(Path::new(&dir));
    if let Err(e) = paths.require() {
        return Outcome {
            status: Status::Skip,
            detail: format!("{e}"),
        };
    }
    let (data, locs) = datasets::load_intel(&paths).unwrap();
    let r = datasets::run_intel_pipeline(&data, &locs.items, &IntelConfig::default()).unwrap();
    let windows_ok = r.window_motes == BTreeSet::from([22, 24, 25, 38]);
    let all = r.agreement_all.agreement_pct;
    let gains_ok = r.snr.iter().all(|c| c.gain_db.is_none_or(|g| (19.0..=28.0).contains(&g)));
    let gaps_ok = r
        .snr
        .iter()
        .all(|c| (c.hl_db - c.sql_db - 10.0 * (c.sensors as f64).log10()).abs() < 1e-9);
    let missing30 = r
        .curves
        .missing
        .iter()
        .find(|p| (p.x - 0.3).abs() < 1e-12)
        .map(|p| p.agreement_pct);
    let checks = [
        ("windows", windows_ok),
        ("agreement", (all - 96.5).abs() <= 1.0),
        ("improvement", (r.improvement_pp - 0.6).abs() <= 0.3),
        ("gains", gains_ok),
        ("sql-hl gaps", gaps_ok),
        ("missing 30%", missing30.is_some_and(|a| (a - 85.0).abs() <= 3.0)),
    ];
    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    verdict(
        failed.is_empty(),
        format!(
            "windows={:?} agreement={all:.2}% improvement={:+.2} pp gains={:?} missing30={:?} failed={failed:?}",
            r.window_motes,
            r.improvement_pp,
            r.snr.iter().map(|c| c.gain_db.map(|g| (g * 10.0).round() / 10.0)).collect::<Vec<_>>(),
            missing30
        ),
    )
}

// 10 -----------------------------------------------------------------------

fn criterion_10() -> Outcome {
    let data = manifest_dir().join("../core/tests/fixtures/intel_mini");
    let data = data.to_str().unwrap();
    let runs: [(&str, Vec<&str>); 4] = [
        ("simulate", vec!["--trials", "3000", "--seed", "11", "simulate", "--fault-frac", "0.2", "--V", "0.8", "--snapshot", "byzantine-decohered"]),
        ("crossover", vec!["--trials", "5000", "--seed", "11", "crossover"]),
        ("bounds", vec!["bounds", "--M", "2..64", "--f", "0,1,2"]),
        ("intel", vec!["--data-dir", data, "--seed", "11", "intel", "--clusters", "2"]),
    ];
    let mut bad = Vec::new();
    let mut files = 0;
    for (name, args) in &runs {
        let a = scratch(&format!("det_{name}_a"));
        let b = scratch(&format!("det_{name}_b"));
        for d in [&a, &b] {
            let o = qfusion(d, args);
            if !o.status.success() {
                return verdict(false, format!("{name} failed: {}", String::from_utf8_lossy(&o.stderr)));
            }
        }
        for entry in fs::read_dir(&a).unwrap() {
            let p = entry.unwrap().path();
            let file = p.file_name().unwrap().to_string_lossy().to_string();
            // manifests carry wall-clock duration and the output paths
            if file.ends_with(".manifest.json") {
                continue;
            }
            files += 1;
            if fs::read(&p).ok() != fs::read(b.join(&file)).ok() {
                bad.push(file);
            }
        }
    }
    verdict(bad.is_empty(), format!("{files} output files compared, differing: {bad:?}"))
}

fn main() {
    let criteria: Vec<(u8, &str, fn() -> Outcome)> = vec![
        (1, "closed-form golden values", criterion_1),
        (2, "8-sensor dataset", criterion_2),
        (3, "scaling laws", criterion_3),
        (4, "Byzantine recovery", criterion_4),
        (5, "bound dominance", criterion_5),
        (6, "bound structure", criterion_6),
        (7, "crossover properties", criterion_7),
        (8, "sweep vs brute-force oracle", criterion_8),
        (9, "Intel mini fixture (golden)", criterion_9_fixture),
        (9, "Intel full dataset", criterion_9_full),
        (10, "determinism", criterion_10),
    ];
    let mut unexpected = 0;
    for (id, name, run) in criteria {
        let t = Instant::now();
        let o = run();
        let tag = match o.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skip => "SKIP",
        };
        let known = o.status == Status::Fail && KNOWN_SHORTFALLS.contains(&id);
        if o.status == Status::Fail && !known {
            unexpected += 1;
        }
        println!(
            "{tag} criterion {id:>2} {name}: {}{} [{:.1} s]",
            o.detail,
            if known { " (known shortfall)" } else { "" },
            t.elapsed().as_secs_f64()
        );
    }
    if unexpected > 0 {
        eprintln!("{unexpected} criteria failed unexpectedly");
        std::process::exit(1);
    }
}
