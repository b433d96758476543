use rayon::prelude::*;
use serde_json::json;

use super::{check_trials, check_unit, iid, orthogonal, Comparison, DiagnosticReport, Estimate, Relation, TestFunction, VERDICT_LEVEL};
use crate::ensembles::Method;
use crate::seed::{derive_seed, streams};
use crate::stats;
use crate::{Error, Result};

/// Per-trial estimates `F̂` for the orthogonal and the iid ensemble.
fn paired_estimates(f: TestFunction, d: usize, s: usize, z: &[f64], trials: usize, seed: u64) -> Result<(Vec<f64>, Vec<f64>)> {
    let ort_stream = derive_seed(seed, streams::METHOD_BASE + Method::Bomc.id(), s as u64);
    let iid_stream = derive_seed(seed, streams::METHOD_BASE + Method::Mc.id(), s as u64);
    let pairs: Vec<(f64, f64)> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let ort = orthogonal(d, s, derive_seed(ort_stream, 0, t))?;
            let iid = iid(d, s, derive_seed(iid_stream, 0, t))?;
            Ok((f.estimate(&ort, z), f.estimate(&iid, z)))
        })
        .collect::<Result<_>>()?;
    Ok(pairs.into_iter().unzip())
}

fn boot(xs: &[f64], seed: u64, tag: u64) -> Estimate {
    Estimate::new(
        stats::mean(xs),
        stats::bootstrap_mean(xs, stats::BOOTSTRAP_RESAMPLES, VERDICT_LEVEL, derive_seed(seed, streams::BOOTSTRAP, tag)),
    )
}

fn check_shape(d: usize, z: &[f64]) -> Result<()> {
    if d == 0 || z.len() != d {
        return Err(Error::Arity(format!("z has length {}, expected d = {d}", z.len())));
    }
    Ok(())
}

/// MGF dominance `E e^{λF̂_ort} ≤ E e^{λF̂_iid}` for a
/// function monotone in `|u|`.
pub fn mgf_dominance_test(
    f: TestFunction,
    lambdas: &[f64],
    d: usize,
    s: usize,
    z: &[f64],
    trials: usize,
    seed: u64,
) -> Result<DiagnosticReport> {
    if !f.is_monotone_in_abs() {
        return Err(Error::Parameter(format!("MGF dominance needs a class F1 function; {f} is class {}", f.class())));
    }
    check_shape(d, z)?;
    check_unit(z)?;
    check_trials(trials, 10_000)?;
    if s == 0 || s > d {
        return Err(Error::Dimension(format!("need 1 <= s <= d, got s = {s}, d = {d}")));
    }
    let (ort, iid) = paired_estimates(f, d, s, z, trials, seed)?;
    let comparisons = lambdas
        .iter()
        .enumerate()
        .map(|(k, &lambda)| {
            let e_ort: Vec<f64> = ort.iter().map(|v| (lambda * v).exp()).collect();
            let e_iid: Vec<f64> = iid.iter().map(|v| (lambda * v).exp()).collect();
            Comparison::new(
                format!("E exp({lambda} F_ort) <= E exp({lambda} F_iid)"),
                boot(&e_ort, seed, 2 * k as u64),
                Relation::Le,
                boot(&e_iid, seed, 2 * k as u64 + 1),
            )
        })
        .collect();
    let config = json!({ "f": f, "lambdas": lambdas, "d": d, "s": s, "z": z, "trials": trials, "seed": seed });
    Ok(DiagnosticReport::new("mgf", config, comparisons, true))
}

/// MSE of block-orthogonal versus iid estimates of `E f(ωᵀz)`, per multiplier.
///
/// Each multiplier yields a strict comparison `MSE_ort < MSE_iid` and two
/// unbiasedness checks (trial mean within 3 standard errors of the truth).
/// The verdict binds for class F1 only.
pub fn mse_ordering_test(
    f: TestFunction,
    d: usize,
    multipliers: &[usize],
    trials: usize,
    z: &[f64],
    seed: u64,
) -> Result<DiagnosticReport> {
    check_shape(d, z)?;
    check_trials(trials, 450)?;
    if multipliers.is_empty() || multipliers.contains(&0) {
        return Err(Error::Parameter("multipliers must be a non-empty list of positive integers".into()));
    }
    let truth = f.expectation(z);
    let mut comparisons = Vec::new();
    for (k, &m) in multipliers.iter().enumerate() {
        let s = m * d;
        let (ort, iid) = paired_estimates(f, d, s, z, trials, seed)?;
        for (name, xs) in [("ort", &ort), ("iid", &iid)] {
            let se = stats::std_err(xs);
            let mean = stats::mean(xs);
            comparisons.push(Comparison::new(
                format!("s={s}: mean F_{name} within 3 SE of F"),
                Estimate { value: mean, lo: mean - 3.0 * se, hi: mean + 3.0 * se },
                Relation::Covers,
                Estimate::exact(truth),
            ));
        }
        let sq = |xs: &[f64]| xs.iter().map(|v| (v - truth) * (v - truth)).collect::<Vec<f64>>();
        comparisons.push(Comparison::new(
            format!("s={s}: MSE_ort < MSE_iid"),
            boot(&sq(&ort), seed, 2 * k as u64),
            Relation::Lt,
            boot(&sq(&iid), seed, 2 * k as u64 + 1),
        ));
    }
    let config = json!({ "f": f, "d": d, "multipliers": multipliers, "trials": trials, "z": z, "seed": seed });
    Ok(DiagnosticReport::new("mse-ordering", config, comparisons, f.is_monotone_in_abs()))
}

/// Empirical tails `P(|F̂ − F| ≥ ε)` of orthogonal and iid estimates.
///
/// Reports `tail_ort ≤ tail_iid` per ε; binding for class F1 only.
pub fn tail_comparison(
    f: TestFunction,
    d: usize,
    s: usize,
    eps: &[f64],
    trials: usize,
    z: &[f64],
    seed: u64,
) -> Result<DiagnosticReport> {
    check_shape(d, z)?;
    check_trials(trials, 100_000)?;
    if s == 0 {
        return Err(Error::Arity("need at least one sample".into()));
    }
    let truth = f.expectation(z);
    let (ort, iid) = paired_estimates(f, d, s, z, trials, seed)?;
    let n = trials as u64;
    let tail = |xs: &[f64], e: f64| {
        let c = xs.iter().filter(|v| (*v - truth).abs() >= e).count() as u64;
        Estimate::new(c as f64 / n as f64, stats::wilson(c, n, stats::Z99))
    };
    let comparisons = eps
        .iter()
        .map(|&e| Comparison::new(format!("P(|F_ort - F| >= {e}) <= P(|F_iid - F| >= {e})"), tail(&ort, e), Relation::Le, tail(&iid, e)))
        .collect();
    let config = json!({ "f": f, "d": d, "s": s, "eps": eps, "trials": trials, "z": z, "seed": seed });
    Ok(DiagnosticReport::new("tail", config, comparisons, f.is_monotone_in_abs()))
}
