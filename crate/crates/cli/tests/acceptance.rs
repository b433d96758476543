//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::Rng;
use rayon::prelude::*;
use structmc::diagnostics::{mgf_dominance_test, mse_ordering_test, nd_empirical_test, uniform_error_sweep, ball_grid};
use structmc::diagnostics::{Relation, TestFunction, Verdict};
use structmc::ensembles::{inverse_normal_cdf, random_rotation, sample_bomc, sample_omc_block, IsotropicLaw, Method};
use structmc::kernels::{mse_benchmark, synthetic_pairs, BenchSettings, FeatureBundle, KernelSpec};
use structmc::method::MethodSampler;
use structmc::nomc::{alg_nomc_build, coherence, energy_gradient, AlgNomcSpec, OptNomcConfig};
use structmc::seed::{derive_seed, rng, streams};
use structmc::swd::{
    gaussian_swd_oracle, benchmark_pair, reference_swd, sample_distribution, swd_benchmark, swd_estimate,
    wasserstein_1d, DistClass, ORACLE_DIRECTIONS,
};
use structmc::table::MseTable;
use structmc::{stats, Matrix};

const MASTER: u64 = 20_260_101;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

type Check = fn() -> Outcome;

fn main() {
    let criteria: [(&str, Option<u64>, Check); 11] = [
        ("alg-NOMC coherence bound", Some(60), coherence_bound),
        ("orthogonality invariants", Some(30), orthogonality),
        ("unbiased kernel estimates", Some(300), unbiasedness),
        ("MSE ordering B-OMC < MC", Some(120), mse_ordering),
        ("method ordering at d = 8", Some(900), method_ordering),
        ("1D transport oracle", Some(5), transport_oracle),
        ("Gaussian SWD oracle", Some(180), swd_oracle),
        ("dependence and MGF diagnostics", Some(180), dependence_and_mgf),
        ("gradient and quantile numerics", Some(10), numerics),
        ("uniform error sweep", Some(180), sweep),
        ("CLI determinism across threads", None, determinism),
    ];
    let mut failures = 0;
    for (i, (name, budget, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = std::panic::catch_unwind(check).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let in_time = budget.is_none_or(|b| elapsed < Duration::from_secs(b));
        let pass = result.pass && in_time;
        if !pass {
            failures += 1;
        }
        let budget = budget.map(|b| format!(", budget {b} s")).unwrap_or_default();
        println!(
            "criterion {:>2} [{name}]: {} ({}; {:.1} s{budget})",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            result.detail,
            elapsed.as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}

fn is_odd_prime(n: u64) -> bool {
    n > 2 && (2..n).take_while(|k| k * k <= n).all(|k| !n.is_multiple_of(k))
}

fn coherence_bound() -> Outcome {
    let cases: Vec<(u64, u32)> = (3..=97)
        .filter(|&p| is_odd_prime(p))
        .map(|p| (p, 2))
        .chain((3..=13).filter(|&p| is_odd_prime(p)).map(|p| (p, 3)))
        .collect();
    let mut worst_slack = f64::INFINITY;
    for &(p, r) in &cases {
        let spec = AlgNomcSpec::new(p, r, None).expect("valid prime");
        let e = alg_nomc_build(&spec, MASTER).expect("alg-NOMC build");
        if e.s() as u64 != p.pow(r) {
            return outcome(false, format!("p = {p}, r = {r}: {} rows, expected {}", e.s(), p.pow(r)));
        }
        let bound = (r as f64 - 1.0) / (p as f64).sqrt();
        let mu = coherence(&e).expect("coherence");
        if mu > bound + 1e-9 {
            return outcome(false, format!("p = {p}, r = {r}: coherence {mu:.12} above {bound:.12}"));
        }
        worst_slack = worst_slack.min(bound - mu);
    }
    outcome(true, format!("{} (p, r) cases, min slack {worst_slack:.3e}", cases.len()))
}

fn orthogonality() -> Outcome {
    let mut r = rng(derive_seed(MASTER, 2, 0));
    let (mut worst_dot, mut worst_gram) = (0.0f64, 0.0f64);
    for i in 0..1000u64 {
        let d = r.random_range(1..=32);
        let law = if i % 2 == 0 { IsotropicLaw::gaussian(d) } else { IsotropicLaw::sphere(d) };
        let seed = derive_seed(MASTER, 2, i + 1);
        let e = if i % 4 < 2 {
            sample_omc_block(&law, r.random_range(1..=d), seed)
        } else {
            sample_bomc(&law, r.random_range(1..=3 * d), seed)
        }
        .expect("ensemble");
        worst_dot = worst_dot.max(e.max_within_block_dot());
        let rotated = e.rotated(&random_rotation(d, derive_seed(seed, streams::ROTATION, 1)));
        worst_gram = worst_gram.max(rotated.rows().gram().max_abs_diff(&e.rows().gram()));
    }
    outcome(
        worst_dot <= 1e-8 && worst_gram <= 1e-9,
        format!("max within-block dot {worst_dot:.2e}, max Gram change {worst_gram:.2e}"),
    )
}

fn unbiasedness() -> Outcome {
    let d = 8;
    let trials = 100_000;
    let spec = KernelSpec::Gaussian { sigma: 1.0, lengthscale: 1.0 };
    let pairs = synthetic_pairs(d, 5, 1.0 / (d as f64).sqrt(), derive_seed(MASTER, 3, 0));
    let truth: Vec<f64> = pairs
        .iter()
        .map(|(x, y)| (-0.5 * x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()).exp())
        .collect();
    let opt = OptNomcConfig { seed: MASTER, ..Default::default() };
    let mut worst = 0.0f64;
    for method in [Method::Mc, Method::Bomc, Method::Qmc, Method::OptNomc, Method::AlgNomc] {
        let sampler = MethodSampler::new(method, IsotropicLaw::gaussian(d), d, &opt).expect("sampler");
        let values: Vec<Vec<f64>> = (0..trials as u64)
            .into_par_iter()
            .map(|t| {
                let seed = derive_seed(MASTER, 3 + method.id(), t);
                let e = sampler.draw(seed).expect("draw");
                let fb = FeatureBundle::with_random_phases(spec, e, derive_seed(seed, streams::PHASES, 0)).expect("features");
                pairs.iter().map(|(x, y)| fb.approx_kernel(x, y).expect("approx")).collect()
            })
            .collect();
        for (k, &exact) in truth.iter().enumerate() {
            let xs: Vec<f64> = values.iter().map(|v| v[k]).collect();
            let z = (stats::mean(&xs) - exact).abs() / stats::std_err(&xs);
            if z > 3.0 {
                return outcome(false, format!("{method} pair {k}: mean off by {z:.2} SE"));
            }
            worst = worst.max(z);
        }
    }
    outcome(true, format!("5 methods x 5 pairs, worst deviation {worst:.2} SE"))
}

fn mse_ordering() -> Outcome {
    let d = 8;
    let mut z = vec![0.0; d];
    z[0] = 1.0;
    let report = mse_ordering_test(TestFunction::Square, d, &[1], 10_000, &z, MASTER).expect("mse ordering");
    let Some(c) = report.comparisons.iter().find(|c| c.relation == Relation::Lt) else {
        return outcome(false, "no strict MSE comparison in report");
    };
    outcome(
        c.verdict == Verdict::Consistent,
        format!(
            "MSE B-OMC {:.4} [{:.4}, {:.4}] vs MC {:.4} [{:.4}, {:.4}], {:?}",
            c.lhs.value, c.lhs.lo, c.lhs.hi, c.rhs.value, c.rhs.lo, c.rhs.hi, c.verdict
        ),
    )
}

/// `a ≤ b` unless a's interval lies entirely above b's.
fn not_worse(table: &MseTable, a: Method, b: Method, k: usize) -> bool {
    let (a, b) = (table.cell(a, k).expect("cell"), table.cell(b, k).expect("cell"));
    a.mse - a.ci95 <= b.mse + b.ci95
}

fn ordering_summary(table: &MseTable, multipliers: &[usize]) -> (bool, String) {
    let nomc_wins = multipliers
        .iter()
        .filter(|&&k| not_worse(table, Method::OptNomc, Method::Bomc, k) || not_worse(table, Method::AlgNomc, Method::Bomc, k))
        .count();
    let bomc_ok = multipliers.iter().filter(|&&k| not_worse(table, Method::Bomc, Method::Mc, k)).count();
    (
        nomc_wins >= 4 && bomc_ok == multipliers.len(),
        format!("NOMC <= B-OMC at {nomc_wins}/5, B-OMC <= MC at {bomc_ok}/5"),
    )
}

fn method_ordering() -> Outcome {
    let d = 8;
    let multipliers = [1, 2, 3, 4, 5];
    let settings = BenchSettings {
        methods: vec![Method::Mc, Method::Bomc, Method::OptNomc, Method::AlgNomc],
        d,
        multipliers: multipliers.to_vec(),
        trials: 450,
        master_seed: MASTER,
        opt: OptNomcConfig::default(),
    };
    let spec = KernelSpec::Gaussian { sigma: 1.0, lengthscale: 1.0 };
    let pairs = synthetic_pairs(d, 100, 1.0 / (d as f64).sqrt(), MASTER);
    let kernel = mse_benchmark(&spec, &pairs, &settings).expect("kernel benchmark");
    let (kernel_ok, kernel_msg) = ordering_summary(&kernel, &multipliers);

    let (da, db) = benchmark_pair(DistClass::Gaussian, d, MASTER).expect("pair");
    let a = sample_distribution(&da, 10_000, derive_seed(MASTER, streams::CLOUD, 0)).expect("cloud");
    let b = sample_distribution(&db, 10_000, derive_seed(MASTER, streams::CLOUD, 1)).expect("cloud");
    let truth = reference_swd(&a, &b, 20_000, 2.0, MASTER).expect("reference");
    let swd = swd_benchmark("gaussian", &a, &b, truth, 2.0, &settings).expect("swd benchmark");
    let (swd_ok, swd_msg) = ordering_summary(&swd.table, &multipliers);
    outcome(kernel_ok && swd_ok, format!("kernel: {kernel_msg}; SWD: {swd_msg}"))
}

fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let j = (i..v.len()).rev().find(|&j| v[j] > v[i - 1]).expect("successor");
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

fn transport_oracle() -> Outcome {
    let mut r = rng(derive_seed(MASTER, 6, 0));
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let m = r.random_range(1..=6);
        let p = [1.0, 1.5, 2.0, 3.0][r.random_range(0..4)];
        let xs: Vec<f64> = (0..m).map(|_| r.random_range(-3.0..3.0)).collect();
        let ys: Vec<f64> = (0..m).map(|_| r.random_range(-3.0..3.0)).collect();
        let mut perm: Vec<usize> = (0..m).collect();
        let mut best = f64::INFINITY;
        loop {
            let cost = perm.iter().enumerate().map(|(i, &j)| (xs[i] - ys[j]).abs().powf(p)).sum::<f64>() / m as f64;
            best = best.min(cost);
            if !next_permutation(&mut perm) {
                break;
            }
        }
        let got = wasserstein_1d(&xs, &ys, p).expect("w1d");
        worst = worst.max((got - best.powf(1.0 / p)).abs());
    }
    outcome(worst <= 1e-12, format!("200 instances, max deviation {worst:.2e}"))
}

fn swd_oracle() -> Outcome {
    let d = 3;
    let (da, db) = benchmark_pair(DistClass::Gaussian, d, MASTER).expect("pair");
    let (value, half) =
        gaussian_swd_oracle(&da.means()[0], &da.covariances()[0], &db.means()[0], &db.covariances()[0], ORACLE_DIRECTIONS, MASTER)
            .expect("oracle");
    let law = IsotropicLaw::sphere(d);
    let estimates: Vec<f64> = (0..100u64)
        .map(|t| {
            let seed = derive_seed(MASTER, 7, t);
            let a = sample_distribution(&da, 10_000, derive_seed(seed, streams::CLOUD, 0)).expect("cloud");
            let b = sample_distribution(&db, 10_000, derive_seed(seed, streams::CLOUD, 1)).expect("cloud");
            let dirs = sample_bomc(&law, 200, derive_seed(seed, streams::REFERENCE, 0)).expect("directions");
            swd_estimate(&a, &b, &dirs, 2.0).expect("estimate")
        })
        .collect();
    let (mean, se) = (stats::mean(&estimates), stats::std_err(&estimates));
    let gap = (mean - value).abs();
    outcome(
        gap <= half + 3.0 * se,
        format!("estimate {mean:.5} vs oracle {value:.5}; gap {gap:.2e}, allowed {:.2e}", half + 3.0 * se),
    )
}

fn dependence_and_mgf() -> Outcome {
    let nd = nd_empirical_test(3, &[1.0, 0.0, 0.0], &[0.2, 0.4, 0.6, 0.8, 1.0], 100_000, MASTER).expect("nd test");
    let mgf = mgf_dominance_test(TestFunction::Square, &[-0.5, -0.25, 0.25, 0.5], 4, 4, &[1.0, 0.0, 0.0, 0.0], 100_000, MASTER)
        .expect("mgf test");
    outcome(
        nd.verdict == Verdict::Consistent && mgf.verdict == Verdict::Consistent,
        format!("nd {:?}, mgf {:?}", nd.verdict, mgf.verdict),
    )
}

/// Energy of particle `i` against the rest, written out independently.
fn partial_energy(rows: &[Vec<f64>], i: usize, delta: f64) -> f64 {
    (0..rows.len())
        .filter(|&j| j != i)
        .map(|j| {
            let d2: f64 = rows[i].iter().zip(&rows[j]).map(|(a, b)| (a - b) * (a - b)).sum();
            delta / (delta + d2)
        })
        .sum()
}

/// Standard normal CDF from the Taylor series of `∫₀ˣ e^{-t²/2} dt`.
fn series_phi(x: f64) -> f64 {
    let (mut term, mut sum, mut n) = (x, x, 0.0);
    while term.abs() > 1e-17 * sum.abs() {
        n += 1.0;
        term *= x * x / (2.0 * n + 1.0);
        sum += term;
    }
    0.5 + (-0.5 * x * x).exp() * sum / (2.0 * std::f64::consts::PI).sqrt()
}

fn numerics() -> Outcome {
    let mut r = rng(derive_seed(MASTER, 9, 0));
    let mut worst_grad = 0.0f64;
    for _ in 0..100 {
        let d = r.random_range(2..=8);
        let s = r.random_range(2..=12);
        let delta = r.random_range(0.05..1.0);
        let rows: Vec<Vec<f64>> = (0..s).map(|_| (0..d).map(|_| r.random_range(-1.0..1.0)).collect()).collect();
        let g = energy_gradient(&Matrix::from_rows(&rows), delta);
        let h = 1e-6;
        for i in 0..s {
            for k in 0..d {
                let (mut plus, mut minus) = (rows.clone(), rows.clone());
                plus[i][k] += h;
                minus[i][k] -= h;
                let fd = (partial_energy(&plus, i, delta) - partial_energy(&minus, i, delta)) / (2.0 * h);
                let gik = g.row(i)[k];
                worst_grad = worst_grad.max((fd - gik).abs() / gik.abs().max(1e-3));
            }
        }
    }
    let mut worst_cdf = 0.0f64;
    for i in 0..10_000 {
        let u = (i as f64 + 0.5) / 10_000.0;
        let x = inverse_normal_cdf(u).expect("quantile");
        worst_cdf = worst_cdf.max((series_phi(x) - u).abs());
    }
    outcome(
        worst_grad <= 1e-5 && worst_cdf <= 1e-8,
        format!("gradient rel err {worst_grad:.2e}, quantile round trip {worst_cdf:.2e}"),
    )
}

fn sweep() -> Outcome {
    let grid = ball_grid(4, 50, 2.0, MASTER);
    let spec = KernelSpec::Gaussian { sigma: 1.0, lengthscale: 1.0 };
    let table = uniform_error_sweep(&spec, &grid, &[4, 16, 64], Method::Bomc, 500, MASTER, &OptNomcConfig::default())
        .expect("sweep");
    let rows: Vec<String> = table.rows.iter().map(|r| format!("s={}: {:.4} [{:.4}, {:.4}]", r.s, r.mean_sup_err, r.lo, r.hi)).collect();
    outcome(table.strictly_decreasing, rows.join(", "))
}

fn run_cli(command: &str, config: &str, dir: &Path, threads: usize) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let out = dir.join(format!("{command}-{threads}"));
    let cfg = dir.join(format!("{command}.json"));
    fs::write(&cfg, config).map_err(|e| e.to_string())?;
    let o = Command::new(env!("CARGO_BIN_EXE_structmc"))
        .args([command, "--threads", &threads.to_string(), "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .map_err(|e| e.to_string())?;
    if !o.status.success() {
        return Err(format!("{command}: {}", String::from_utf8_lossy(&o.stderr).trim()));
    }
    let mut files = BTreeMap::new();
    for entry in fs::read_dir(&out).map_err(|e| e.to_string())? {
        let path = entry.map_err(|e| e.to_string())?.path();
        files.insert(path.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&path).map_err(|e| e.to_string())?);
    }
    Ok(files)
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().expect("tempdir");
    let alg_path = dir.path().join("alg.csv");
    let configs: Vec<(&str, String)> = vec![
        ("sample", r#"{"command":"sample","law":"gaussian","d":6,"s":20,"seed":3,"method":"bomc"}"#.into()),
        (
            "sample",
            r#"{"command":"sample","law":"matern:1.5","d":4,"s":9,"seed":3,"method":"opt-nomc","opt":{"iterations":500}}"#
                .into(),
        ),
        ("build-nomc", r#"{"command":"build-nomc","method":"opt-nomc","d":4,"s":12,"seed":3,"opt":{"iterations":2000}}"#.into()),
        ("build-nomc", r#"{"command":"build-nomc","method":"alg-nomc","p":5,"r":2,"seed":3}"#.into()),
        ("coherence", format!(r#"{{"command":"coherence","input":{alg_path:?}}}"#)),
        (
            "bench-kernel",
            r#"{"command":"bench-kernel","kernel":{"kind":"matern","nu":2.5},"d":6,"seed":3,"trials":30,"multipliers":[1,2],
                "pairs":{"source":"synthetic","count":10},"opt":{"iterations":1000}}"#
                .into(),
        ),
        (
            "bench-swd",
            r#"{"command":"bench-swd","distribution":"gaussian","d":6,"seed":3,"trials":10,"points":1000,
                "reference_directions":2000,"multipliers":[1,2],"methods":["mc","qmc","bomc","alg-nomc"]}"#
                .into(),
        ),
        ("diagnose", r#"{"command":"diagnose","claim":"nd","d":3,"seed":3,"trials":10000}"#.into()),
        ("diagnose", r#"{"command":"diagnose","claim":"mgf","d":4,"seed":3,"trials":10000}"#.into()),
        ("diagnose", r#"{"command":"diagnose","claim":"mse-ordering","d":4,"seed":3,"trials":450,"f":"cos"}"#.into()),
        ("diagnose", r#"{"command":"diagnose","claim":"tail","d":3,"seed":3,"trials":100000}"#.into()),
        (
            "diagnose",
            r#"{"command":"diagnose","claim":"sweep","d":3,"seed":3,"trials":20,"grid_size":10,"s_values":[3,12]}"#.into(),
        ),
    ];
    let mut artifacts = 0;
    for (i, (command, config)) in configs.iter().enumerate() {
        let sub = dir.path().join(i.to_string());
        fs::create_dir_all(&sub).expect("mkdir");
        let one = match run_cli(command, config, &sub, 1) {
            Ok(f) => f,
            Err(e) => return outcome(false, e),
        };
        let eight = match run_cli(command, config, &sub, 8) {
            Ok(f) => f,
            Err(e) => return outcome(false, e),
        };
        if one != eight {
            return outcome(false, format!("config {i} ({command}): artifacts differ between 1 and 8 threads"));
        }
        if i == 3 {
            fs::copy(sub.join("build-nomc-1").join("ensemble.csv"), &alg_path).expect("copy ensemble");
        }
        artifacts += one.len();
    }
    outcome(true, format!("{} runs, {artifacts} artifacts byte-identical", configs.len()))
}
