//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero if any fail.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use serde_json::Value;
use settle_core::jitter::{
    gaussian_chain, isi1_chain, wrong_update_probability, GaussianJitterSpec, IsiTraceModel,
    WindowSpec,
};
use settle_core::markov::{
    absorption_series, absorption_stats, transitions_for_confidence, AbsorbingChain, StopRule,
};
use settle_core::par::Execution;
use settle_core::reduction::{compare_mismatch, DEFAULT_DIVIDED_PERIOD_NS};
use settle_core::sim::{run_trials, InitialPosition, Trial, TrialConfig};
use settle_core::stats::{ks_critical, ks_statistic, summarize};

const SEED: u64 = 0x5e771e;

type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

fn settle(cmd: &str, cfg: &Path, out: &Path, extra: &[&str]) {
    let status = Command::new(env!("CARGO_BIN_EXE_settle"))
        .args([cmd, "--quiet", "--config"])
        .arg(cfg)
        .arg("--out")
        .arg(out)
        .args(extra)
        .status()
        .expect("settle runs");
    assert!(
        status.success(),
        "settle {cmd} {} failed: {status}",
        cfg.display()
    );
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<f64>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| {
            l.split(',')
                .map(|f| f.parse().unwrap_or(f64::NAN))
                .collect()
        })
        .collect()
}

fn lazy_walk(width: usize) -> AbsorbingChain {
    AbsorbingChain::birth_death(&vec![(0.25, 0.5, 0.25); width - 1]).unwrap()
}

fn c1_lazy_walk_oracle() -> Outcome {
    let t = Instant::now();
    let mut worst = 0.0f64;
    for n in 4..=200usize {
        let s = absorption_stats(&lazy_walk(n)).unwrap();
        for k in 1..n {
            let exact = 2.0 * (k * (n - k)) as f64;
            worst = worst.max((s.mean_of(k) - exact).abs() / exact);
        }
    }
    let el = t.elapsed();
    outcome(
        worst <= 1e-9 && el < Duration::from_secs(1),
        format!("max relative error {worst:.2e} (≤ 1e-9), {el:.2?} (< 1 s)"),
    )
}

fn c2_window_40_confidence() -> Outcome {
    let t = Instant::now();
    let c = isi1_chain(40).unwrap();
    let n = transitions_for_confidence(&c, &c.point_mass(20), 0.99).unwrap();
    let el = t.elapsed();
    outcome(
        (2700..=3300).contains(&n) && el < Duration::from_secs(1),
        format!("n@0.99 = {n} (3000 ± 10%), {el:.2?} (< 1 s)"),
    )
}

fn c3_window_5_confidence() -> Outcome {
    let c = isi1_chain(5).unwrap();
    let w = WindowSpec::centered(5).unwrap();
    let n = transitions_for_confidence(&c, &c.point_mass(w.initial_offset_steps()), 0.99).unwrap();
    let ns = n as f64 * DEFAULT_DIVIDED_PERIOD_NS;
    outcome(
        n == 32 && ns == 128.0,
        format!("n@0.99 = {n} (= 32), {ns} ns (= 128 ns)"),
    )
}

fn c4_model_vs_simulation(dir: &Path) -> Outcome {
    let t = Instant::now();
    let sim = dir.join("c4_sim");
    settle(
        "simulate",
        &config("simulate_isi1_w40.toml"),
        &sim,
        &["--trials", "100"],
    );
    let stats = absorption_stats(&isi1_chain(40).unwrap()).unwrap();
    let rows = csv_rows(&sim.join("escape_stats.csv"));
    let mut worst = 0.0f64;
    for r in &rows {
        let (pos, mean, stderr) = (r[0], r[1], r[3]);
        worst = worst.max((mean - stats.mean_of(pos as usize)).abs() / stderr);
    }

    let trial = Trial::new(TrialConfig::discrete(
        IsiTraceModel::one_bit(0.0, 40.0).unwrap(),
        10_000_000,
    ))
    .unwrap();
    let times: Vec<u64> = run_trials(
        &trial,
        10_000,
        InitialPosition::Steps(20.0),
        0,
        SEED,
        Execution::Parallel,
    )
    .unwrap()
    .iter()
    .map(|r| r.escape_cycle.unwrap())
    .collect();
    let chain = isi1_chain(40).unwrap();
    let horizon = *times.iter().max().unwrap() as usize;
    let series = absorption_series(
        &chain,
        &chain.point_mass(20),
        StopRule::Transitions(horizon),
    )
    .unwrap();
    let d = ks_statistic(&times, |n| series.cdf[n as usize]);
    let crit = ks_critical(times.len(), 0.01);
    let el = t.elapsed();
    outcome(
        rows.len() >= 10 && worst <= 3.0 && d <= crit && el < Duration::from_secs(30),
        format!(
            "{} positions, worst |Δmean| = {worst:.2} stderr (≤ 3); KS D = {d:.4} (≤ {crit:.4}); {el:.2?} (< 30 s)",
            rows.len()
        ),
    )
}

fn c5_mismatch_reduction() -> Outcome {
    let r = compare_mismatch(WindowSpec::centered(40).unwrap(), 10.0).unwrap();
    let c = r.at(20.0).unwrap();
    let (m, s) = (c.reduction_mean.unwrap(), c.reduction_std.unwrap());
    outcome(
        (0.30..=0.45).contains(&m) && s > m,
        format!("centre mean reduction {m:.4} (in [0.30, 0.45]), std reduction {s:.4} (> mean)"),
    )
}

fn c6_variance() -> Outcome {
    let t = Instant::now();
    let stats = absorption_stats(&isi1_chain(20).unwrap()).unwrap();
    let trial = Trial::new(TrialConfig::discrete(
        IsiTraceModel::one_bit(0.0, 20.0).unwrap(),
        10_000_000,
    ))
    .unwrap();
    let times: Vec<f64> = run_trials(
        &trial,
        100_000,
        InitialPosition::Steps(10.0),
        0,
        SEED,
        Execution::Parallel,
    )
    .unwrap()
    .iter()
    .map(|r| r.escape_cycle.unwrap() as f64)
    .collect();
    let sample = summarize(&times).variance;
    let model = stats.variance_of(10);
    let rel = (sample - model).abs() / model;
    let el = t.elapsed();
    outcome(
        rel <= 0.05 && el < Duration::from_secs(60),
        format!("model {model:.1}, sample {sample:.1}, relative difference {rel:.4} (≤ 0.05); {el:.2?} (< 60 s)"),
    )
}

fn c7_eye_morphology(dir: &Path) -> Outcome {
    let summaries: Vec<Value> = ["benign", "moderate", "heavy"]
        .iter()
        .map(|n| {
            let out = dir.join(format!("c7_{n}"));
            settle("eye", &config(&format!("eye_{n}.toml")), &out, &[]);
            json(&out.join("summary.json"))
        })
        .collect();
    let regions: Vec<usize> = summaries
        .iter()
        .map(|s| s["regions"].as_array().unwrap().len())
        .collect();
    let heavy = &summaries[2];
    let window = heavy["window_ui"].as_f64().unwrap();
    let subs: Vec<f64> = heavy["sub_windows_ui"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    let targets = [0.08, 0.15, 0.07];
    let subs_ok = subs.len() == 3 && subs.iter().zip(targets).all(|(s, t)| (s - t).abs() <= 0.03);
    outcome(
        regions == [1, 2, 4] && (window - 0.30).abs() <= 0.05 && subs_ok,
        format!(
            "regions {regions:?} (= [1, 2, 4]); heavy window {window:.4} UI (0.30 ± 0.05); sub-windows {:?} (0.08/0.15/0.07 ± 0.03)",
            subs.iter().map(|s| format!("{s:.3}")).collect::<Vec<_>>()
        ),
    )
}

fn c8_isi2_peak(dir: &Path) -> Outcome {
    let out = dir.join("c8");
    settle("analyze", &config("analyze_isi2.toml"), &out, &[]);
    let peak = json(&out.join("summary.json"))["peak"]["mean_cycles"]
        .as_f64()
        .unwrap();
    outcome(
        (peak - 1100.0).abs() <= 0.15 * 1100.0,
        format!("peak mean {peak:.1} cycles (1100 ± 15%)"),
    )
}

fn c9_gaussian_sanity() -> Outcome {
    let spec = GaussianJitterSpec::new(20.0).unwrap();
    let half = wrong_update_probability(0.0, &spec);
    let c = gaussian_chain(&spec).unwrap();
    let s = absorption_stats(&c).unwrap();
    let n = c.n_states();
    let centre = (n - 1) / 2;
    let asym = (1..centre)
        .map(|i| (s.mean_of(i) - s.mean_of(n - 1 - i)).abs())
        .fold(0.0, f64::max);
    let monotone = (1..centre).all(|i| s.mean_of(i) < s.mean_of(i + 1))
        && (centre..n - 2).all(|i| s.mean_of(i) > s.mean_of(i + 1));
    outcome(
        half == 0.5 && asym < 1e-9 && monotone,
        format!("P(wrong | m = 0) = {half}; max asymmetry {asym:.2e} (< 1e-9); monotone toward edges: {monotone}"),
    )
}

fn c10_training(dir: &Path) -> Outcome {
    let out = dir.join("c10");
    settle(
        "compare",
        &config("compare_training.toml"),
        &out,
        &["--trials", "1000"],
    );
    let s = json(&out.join("summary.json"));
    let p = s["significance"]["p_value"].as_f64().unwrap();
    let (b, t) = (
        s["headline"]["baseline_mean"].as_f64().unwrap(),
        s["headline"]["treated_mean"].as_f64().unwrap(),
    );
    let n = s["trials_per_arm"].as_u64().unwrap();
    outcome(
        n >= 1000 && t < b && p < 0.01,
        format!("{n} trials/arm; bernoulli mean {b:.1}, training mean {t:.1}; Welch p = {p:.3e} (< 0.01)"),
    )
}

fn c11_coarse_first(dir: &Path) -> Outcome {
    let out = dir.join("c11");
    settle(
        "simulate",
        &config("simulate_coarse_first.toml"),
        &out,
        &["--trials", "10000"],
    );
    let rows = csv_rows(&out.join("trials.csv"));
    let inside = rows.iter().filter(|r| r[5] == 1.0).count();
    let frac = inside as f64 / rows.len() as f64;
    outcome(
        rows.len() == 10_000 && frac >= 0.99,
        format!(
            "{inside}/{} escaped within 40 coarse cycles = {:.2}% (≥ 99%)",
            rows.len(),
            100.0 * frac
        ),
    )
}

fn c12_determinism(dir: &Path) -> Outcome {
    let mut same = true;
    for (cmd, cfg) in [
        ("simulate", "simulate_isi1_w40.toml"),
        ("simulate", "simulate_coarse_first.toml"),
        ("simulate", "simulate_rc.toml"),
        ("eye", "eye_heavy.toml"),
        ("compare", "compare_training.toml"),
    ] {
        let a = dir.join(format!("c12_{cfg}_a"));
        let b = dir.join(format!("c12_{cfg}_b"));
        settle(cmd, &config(cfg), &a, &["--trials", "200"]);
        settle(cmd, &config(cfg), &b, &["--trials", "200"]);
        for entry in std::fs::read_dir(&a).unwrap() {
            let name = entry.unwrap().file_name();
            same &= std::fs::read(a.join(&name)).unwrap() == std::fs::read(b.join(&name)).unwrap();
        }
    }
    outcome(same, "five simulation configs, rerun byte-identical")
}

fn main() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let criteria: Vec<(&str, Check)> = vec![
        (
            "lazy-walk fundamental-matrix oracle",
            Box::new(c1_lazy_walk_oracle),
        ),
        (
            "window-40 transitions for 99%",
            Box::new(c2_window_40_confidence),
        ),
        (
            "window-5 transitions for 99%",
            Box::new(c3_window_5_confidence),
        ),
        (
            "model vs Monte Carlo agreement",
            Box::new(|| c4_model_vs_simulation(dir)),
        ),
        ("10% mismatch reduction", Box::new(c5_mismatch_reduction)),
        ("variance vs Monte Carlo", Box::new(c6_variance)),
        ("RC eye morphology", Box::new(|| c7_eye_morphology(dir))),
        ("2-bit-ISI peak mean", Box::new(|| c8_isi2_peak(dir))),
        ("Gaussian chain sanity", Box::new(c9_gaussian_sanity)),
        (
            "training sequence reduction",
            Box::new(|| c10_training(dir)),
        ),
        ("coarse-first escape", Box::new(|| c11_coarse_first(dir))),
        ("determinism", Box::new(|| c12_determinism(dir))),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("{tag} criterion {:>2} {name}: {}", i + 1, o.detail);
        if !o.pass {
            failed.push(i + 1);
        }
    }
    if failed.is_empty() {
        println!("all {} criteria pass", criteria.len());
    } else {
        println!("failing criteria: {failed:?}");
        std::process::exit(1);
    }
}
