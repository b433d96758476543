use rayon::prelude::*;
use serde::Serialize;

use super::VERDICT_LEVEL;
use crate::ensembles::{IsotropicLaw, Method};
use crate::kernels::{draw_phases, exact_kernel, spectral_law, FeatureBundle, KernelFamily, KernelSpec};
use crate::method::MethodSampler;
use crate::nomc::OptNomcConfig;
use crate::seed::{derive_seed, rng, streams};
use crate::stats;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub s: usize,
    pub trials: usize,
    /// Mean over trials of the sup-norm error over the grid.
    pub mean_sup_err: f64,
    pub lo: f64,
    pub hi: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub kernel: KernelSpec,
    pub method: crate::ensembles::Method,
    pub grid_size: usize,
    pub rows: Vec<SweepRow>,
    /// Every row's interval lies strictly below the previous row's.
    pub strictly_decreasing: bool,
}

/// `n` seeded points uniform in the ball of the given radius.
pub fn ball_grid(d: usize, n: usize, radius: f64, seed: u64) -> Vec<Vec<f64>> {
    let law = IsotropicLaw::sphere(d);
    let mut r = rng(derive_seed(seed, streams::PAIRS, 2));
    (0..n)
        .map(|_| {
            let u: f64 = rand::Rng::random(&mut r);
            let rho = radius * u.powf(1.0 / d as f64);
            law.sample(&mut r).into_iter().map(|v| v * rho).collect()
        })
        .collect()
}

/// Sup-norm error of random-feature estimates `K̂(z, y₀)` over a grid.
///
/// `y₀` is the origin for shift-invariant kernels and `e₁` for PNG kernels.
/// For each `s` the sup error is averaged over `trials` independent
/// ensembles and bracketed by a 99% bootstrap interval.
pub fn uniform_error_sweep(
    kernel: &KernelSpec,
    grid: &[Vec<f64>],
    s_values: &[usize],
    method: Method,
    trials: usize,
    seed: u64,
    opt: &OptNomcConfig,
) -> Result<SweepTable> {
    kernel.validate()?;
    if grid.is_empty() {
        return Err(Error::Config("empty evaluation grid".into()));
    }
    if trials < 2 || s_values.is_empty() || s_values.contains(&0) {
        return Err(Error::Config("need at least 2 trials and positive sample counts".into()));
    }
    let d = grid[0].len();
    if d == 0 || grid.iter().any(|z| z.len() != d) {
        return Err(Error::Arity("grid points must share one positive dimension".into()));
    }
    let mut y0 = vec![0.0; d];
    if kernel.family() == KernelFamily::Png {
        y0[0] = 1.0;
    }
    let exact: Vec<f64> = grid
        .iter()
        .map(|z| exact_kernel(kernel, z, &y0))
        .collect::<Result<_>>()
        .map_err(|e| Error::Config(format!("no exact value for {kernel}: {e}")))?;
    let law = spectral_law(kernel, d)?;

    let mut rows = Vec::new();
    for &s in s_values {
        let sampler = MethodSampler::new(method, law, s, opt)?;
        let stream = derive_seed(seed, streams::METHOD_BASE + method.id(), s as u64);
        let sups: Vec<f64> = (0..trials as u64)
            .into_par_iter()
            .map(|t| {
                let e = sampler.draw(derive_seed(stream, 0, t))?;
                let phases = (kernel.family() == KernelFamily::ShiftInvariant)
                    .then(|| draw_phases(s, derive_seed(derive_seed(seed, streams::PHASES, s as u64), 1, t)));
                let bundle = FeatureBundle::new(*kernel, e, phases)?;
                let fy = bundle.feature_vector(&y0)?;
                let mut sup = 0.0f64;
                for (z, k) in grid.iter().zip(&exact) {
                    let fz = bundle.feature_vector(z)?;
                    let approx: f64 = fz.iter().zip(&fy).map(|(a, b)| a * b).sum();
                    sup = sup.max((approx - k).abs());
                }
                Ok(sup)
            })
            .collect::<Result<_>>()?;
        let ci = stats::bootstrap_mean(&sups, stats::BOOTSTRAP_RESAMPLES, VERDICT_LEVEL, derive_seed(stream, streams::BOOTSTRAP, 0));
        rows.push(SweepRow {
            s,
            trials,
            mean_sup_err: stats::mean(&sups),
            lo: ci.lo,
            hi: ci.hi,
            std: stats::std_dev(&sups),
        });
    }
    let strictly_decreasing = rows.windows(2).all(|w| w[1].hi < w[0].lo);
    Ok(SweepTable { kernel: *kernel, method, grid_size: grid.len(), rows, strictly_decreasing })
}
