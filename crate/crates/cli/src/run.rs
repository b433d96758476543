//! Dispatch of a parsed configuration to the library.

use std::fs;
use std::path::PathBuf;

use serde_json::json;
use structmc::diagnostics::{
    ball_grid, mgf_dominance_test, mse_ordering_test, nd_empirical_test, tail_comparison, uniform_error_sweep,
    TestFunction,
};
use structmc::ensembles::{IsotropicLaw, Method};
use structmc::kernels::{mse_benchmark, sample_pairs, synthetic_pairs, BenchSettings, Dataset, KernelSpec};
use structmc::method::MethodSampler;
use structmc::nomc::{
    alg_nomc_build, coherence, load_ensemble, opt_nomc_build, save_ensemble, AlgNomcSpec, OptNomcConfig,
};
use structmc::seed::{derive_seed, streams};
use structmc::swd::{gaussian_swd_oracle, benchmark_pair, reference_swd, sample_distribution, swd_benchmark, DistClass};

use crate::config::{
    BenchKernelConfig, BenchSwdConfig, BuildNomcConfig, Claim, CoherenceConfig, DiagnoseConfig, PairSource, RunConfig,
    SampleConfig,
};
use crate::svg::{emit_svg_lineplot, Plot};
use crate::CliError;

/// Runs one command and returns the paths of the artifacts it wrote.
pub fn run(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let out = cfg.out();
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    match cfg {
        RunConfig::Sample(c) => sample(c),
        RunConfig::BuildNomc(c) => build_nomc(c),
        RunConfig::Coherence(c) => measure_coherence(c),
        RunConfig::BenchKernel(c) => bench_kernel(c),
        RunConfig::BenchSwd(c) => bench_swd(c),
        RunConfig::Diagnose(c) => diagnose(c),
    }
}

fn write(path: PathBuf, contents: &str) -> Result<PathBuf, CliError> {
    fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}

fn write_json(path: PathBuf, value: &impl serde::Serialize) -> Result<PathBuf, CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("artifacts serialize");
    text.push('\n');
    write(path, &text)
}

fn opt_config(opt: Option<OptNomcConfig>, seed: u64) -> OptNomcConfig {
    OptNomcConfig { seed, ..opt.unwrap_or_default() }
}

fn sample(c: &SampleConfig) -> Result<Vec<PathBuf>, CliError> {
    let law = IsotropicLaw::new(c.law, c.d)?;
    let opt = opt_config(c.opt, derive_seed(c.seed, streams::METHOD_BASE + Method::OptNomc.id(), 0));
    let ensemble = MethodSampler::new(c.method, law, c.s, &opt)?.draw(c.seed)?;
    let path = c.out.join("ensemble.csv");
    save_ensemble(&ensemble, &path)?;
    Ok(vec![path])
}

fn build_nomc(c: &BuildNomcConfig) -> Result<Vec<PathBuf>, CliError> {
    let path = c.out.join("ensemble.csv");
    if c.method == Method::OptNomc {
        let (d, s) = (c.d.unwrap_or_default(), c.s.unwrap_or_default());
        let (ensemble, trace) = opt_nomc_build(d, s, &opt_config(c.opt, c.seed))?;
        save_ensemble(&ensemble, &path)?;
        let mut csv = String::from("iteration,energy,d_max,d_min\n");
        for p in &trace.points {
            csv.push_str(&format!("{},{},{},{}\n", p.iteration, p.energy, p.d_max, p.d_min));
        }
        let trace_path = write(c.out.join("trace.csv"), &csv)?;
        return Ok(vec![path, trace_path]);
    }
    let r = c.r.unwrap_or(2);
    let spec = match (c.p, c.d) {
        (Some(p), None) => AlgNomcSpec::new(p, r, c.selected_count)?,
        (Some(p), Some(d)) if d as u64 == 2 * p => AlgNomcSpec::new(p, r, c.selected_count)?,
        (_, Some(d)) => AlgNomcSpec::for_dimension(d, r, c.selected_count)?,
        (None, None) => unreachable!("validated"),
    };
    save_ensemble(&alg_nomc_build(&spec, c.seed)?, &path)?;
    Ok(vec![path])
}

fn measure_coherence(c: &CoherenceConfig) -> Result<Vec<PathBuf>, CliError> {
    let e = load_ensemble(&c.input)?;
    let value = coherence(&e)?;
    let report = json!({
        "method": e.method(),
        "law": e.law().tag(),
        "d": e.d(),
        "s": e.s(),
        "seed": e.seed(),
        "coherence": value,
    });
    Ok(vec![write_json(c.out.join("coherence.json"), &report)?])
}

fn settings(methods: &[Method], d: usize, multipliers: &[usize], trials: usize, seed: u64, opt: Option<OptNomcConfig>) -> BenchSettings {
    BenchSettings {
        methods: methods.to_vec(),
        d,
        multipliers: multipliers.to_vec(),
        trials,
        master_seed: seed,
        opt: opt.unwrap_or_default(),
    }
}

fn bench_kernel(c: &BenchKernelConfig) -> Result<Vec<PathBuf>, CliError> {
    let pairs = match &c.pairs {
        PairSource::Synthetic { count, scale } => {
            synthetic_pairs(c.d, *count, scale.unwrap_or(1.0 / (c.d as f64).sqrt()), c.seed)
        }
        PairSource::Dataset { path, count, scale_sample } => {
            let data = Dataset::load(path, *scale_sample, c.seed)?;
            if data.points().ncols() != c.d {
                return Err(CliError::config("d", format!("dataset has {} columns", data.points().ncols())));
            }
            sample_pairs(data.points(), *count, c.seed)?
        }
    };
    let table = mse_benchmark(&c.kernel, &pairs, &settings(&c.methods, c.d, &c.multipliers, c.trials, c.seed, c.opt))?;
    let csv = write(c.out.join("mse.csv"), &table.to_csv())?;
    let svg = c.out.join("mse.svg");
    emit_svg_lineplot(&Plot::from_mse_table(&table, &format!("{} kernel, d = {}", c.kernel, c.d)), &svg)?;
    Ok(vec![csv, svg])
}

fn bench_swd(c: &BenchSwdConfig) -> Result<Vec<PathBuf>, CliError> {
    let (da, db) = benchmark_pair(c.distribution, c.d, c.seed)?;
    let a = sample_distribution(&da, c.points, derive_seed(c.seed, streams::CLOUD, 0))?;
    let b = sample_distribution(&db, c.points, derive_seed(c.seed, streams::CLOUD, 1))?;
    let truth = reference_swd(&a, &b, c.reference_directions, c.p, c.seed)?;
    let label = c.distribution.as_str();
    let result = swd_benchmark(label, &a, &b, truth, c.p, &settings(&c.methods, c.d, &c.multipliers, c.trials, c.seed, c.opt))?;
    let csv = write(c.out.join("swd.csv"), &result.table.to_csv())?;
    let svg = c.out.join("swd.svg");
    emit_svg_lineplot(&Plot::from_mse_table(&result.table, &format!("{label}, d = {}", c.d)), &svg)?;

    let mut reference = json!({
        "distribution": label,
        "d": c.d,
        "points": c.points,
        "p": c.p,
        "reference_directions": c.reference_directions,
        "reference_swd": truth,
    });
    if c.distribution == DistClass::Gaussian && c.p == 2.0 {
        let (v, h) = gaussian_swd_oracle(
            &da.means()[0],
            &da.covariances()[0],
            &db.means()[0],
            &db.covariances()[0],
            structmc::swd::ORACLE_DIRECTIONS,
            c.seed,
        )?;
        reference["population_swd"] = json!({ "value": v, "half_width": h });
    }
    let json_path = write_json(c.out.join("swd-reference.json"), &reference)?;
    Ok(vec![csv, svg, json_path])
}

fn diagnose(c: &DiagnoseConfig) -> Result<Vec<PathBuf>, CliError> {
    let d = c.d;
    let z = c.z.clone().unwrap_or_else(|| {
        let mut e1 = vec![0.0; d];
        e1[0] = 1.0;
        e1
    });
    let f = c.f.unwrap_or(TestFunction::Square);
    let report_path = |claim: Claim| c.out.join(format!("{}.json", claim.as_str()));
    let report = match c.claim {
        Claim::Nd => nd_empirical_test(
            d,
            &z,
            c.thresholds.as_deref().unwrap_or(&[0.2, 0.4, 0.6, 0.8, 1.0]),
            c.trials.unwrap_or(100_000),
            c.seed,
        )?,
        Claim::Mgf => mgf_dominance_test(
            f,
            c.lambdas.as_deref().unwrap_or(&[-0.5, -0.25, 0.25, 0.5]),
            d,
            c.s.unwrap_or(d),
            &z,
            c.trials.unwrap_or(100_000),
            c.seed,
        )?,
        Claim::MseOrdering => {
            mse_ordering_test(f, d, c.multipliers.as_deref().unwrap_or(&[1]), c.trials.unwrap_or(10_000), &z, c.seed)?
        }
        Claim::Tail => tail_comparison(
            f,
            d,
            c.s.unwrap_or(d),
            c.eps.as_deref().unwrap_or(&[0.25, 0.5, 1.0]),
            c.trials.unwrap_or(100_000),
            &z,
            c.seed,
        )?,
        Claim::Sweep => return sweep(c),
    };
    Ok(vec![write(report_path(c.claim), &report.to_json())?])
}

fn sweep(c: &DiagnoseConfig) -> Result<Vec<PathBuf>, CliError> {
    let d = c.d;
    let kernel = c.kernel.unwrap_or(KernelSpec::Gaussian { sigma: 1.0, lengthscale: 1.0 });
    let grid = ball_grid(d, c.grid_size.unwrap_or(50), c.grid_radius.unwrap_or(2.0), c.seed);
    let s_values = c.s_values.clone().unwrap_or_else(|| vec![d, 4 * d, 16 * d]);
    let method = c.method.unwrap_or(Method::Bomc);
    let opt = opt_config(c.opt, derive_seed(c.seed, streams::METHOD_BASE + Method::OptNomc.id(), 0));
    let table = uniform_error_sweep(&kernel, &grid, &s_values, method, c.trials.unwrap_or(500), c.seed, &opt)?;
    let json_path = write_json(c.out.join("sweep.json"), &table)?;
    let svg = c.out.join("sweep.svg");
    emit_svg_lineplot(&Plot::from_sweep(&table, &format!("sup error, {kernel} kernel, d = {d}")), &svg)?;
    Ok(vec![json_path, svg])
}

