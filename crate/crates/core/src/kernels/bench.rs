use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::features::{draw_phases, FeatureBundle};
use super::spec::{exact_kernel, spectral_law, KernelFamily, KernelSpec};
use crate::ensembles::Method;
use crate::method::MethodSampler;
use crate::nomc::OptNomcConfig;
use crate::seed::{derive_seed, streams};
use crate::table::{MseCell, MseTable};
use crate::{Error, Result};

/// Shared configuration of the MSE harnesses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchSettings {
    pub methods: Vec<Method>,
    pub d: usize,
    /// Sample counts as multiples of `d`.
    pub multipliers: Vec<usize>,
    pub trials: usize,
    pub master_seed: u64,
    /// Optimization settings for [`Method::OptNomc`], run once per sample count.
    pub opt: OptNomcConfig,
}

impl BenchSettings {
    pub fn validate(&self) -> Result<()> {
        if self.trials < 2 {
            return Err(Error::Config(format!("need at least 2 trials, got {}", self.trials)));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("no methods requested".into()));
        }
        if self.multipliers.is_empty() || self.multipliers.contains(&0) {
            return Err(Error::Config("multipliers must be a non-empty list of positive integers".into()));
        }
        if self.d == 0 {
            return Err(Error::Config("dimension must be positive".into()));
        }
        Ok(())
    }

    /// Seed of the ensemble drawn by `method` in trial `trial` at `multiplier`.
    pub fn ensemble_seed(&self, method: Method, multiplier: usize, trial: usize) -> u64 {
        let stream = derive_seed(self.master_seed, streams::METHOD_BASE + method.id(), multiplier as u64);
        derive_seed(stream, 0, trial as u64)
    }

    /// Optimizer settings for one sample count; the seed is tied to the master seed.
    pub fn opt_for(&self, s: usize) -> OptNomcConfig {
        OptNomcConfig { seed: derive_seed(self.master_seed, streams::METHOD_BASE + Method::OptNomc.id(), s as u64), ..self.opt }
    }

    pub(crate) fn shared_seed(&self, stream: u64, multiplier: usize, trial: usize) -> u64 {
        derive_seed(derive_seed(self.master_seed, stream, multiplier as u64), 1, trial as u64)
    }
}

/// Mean squared error of random-feature kernel estimates.
///
/// For every multiplier `k` and method, `trials` fresh ensembles of
/// `s = k·d` samples are drawn; each trial's error is averaged over `pairs`.
/// Cos-feature phases are drawn per trial and shared by all methods, so the
/// comparison between methods is paired.
pub fn mse_benchmark(spec: &KernelSpec, pairs: &[(Vec<f64>, Vec<f64>)], settings: &BenchSettings) -> Result<MseTable> {
    settings.validate()?;
    spec.validate()?;
    if pairs.is_empty() {
        return Err(Error::Config("no evaluation pairs".into()));
    }
    let d = settings.d;
    if let Some((x, y)) = pairs.iter().find(|(x, y)| x.len() != d || y.len() != d) {
        return Err(Error::Arity(format!("pair of dimensions ({}, {}) in a d = {d} benchmark", x.len(), y.len())));
    }
    let exact: Vec<f64> = pairs.iter().map(|(x, y)| exact_kernel(spec, x, y)).collect::<Result<_>>()?;
    let law = spectral_law(spec, d)?;

    let mut cells = Vec::new();
    for &method in &settings.methods {
        for &k in &settings.multipliers {
            let s = k * d;
            let sampler = MethodSampler::new(method, law, s, &settings.opt_for(s))?;
            let per_trial: Vec<(f64, f64)> = (0..settings.trials)
                .into_par_iter()
                .map(|t| {
                    let ensemble = sampler.draw(settings.ensemble_seed(method, k, t))?;
                    let phases = (spec.family() == KernelFamily::ShiftInvariant)
                        .then(|| draw_phases(s, settings.shared_seed(streams::PHASES, k, t)));
                    let bundle = FeatureBundle::new(*spec, ensemble, phases)?;
                    let (mut sq, mut err) = (0.0, 0.0);
                    for ((x, y), truth) in pairs.iter().zip(&exact) {
                        let e = bundle.approx_kernel(x, y)? - truth;
                        sq += e * e;
                        err += e;
                    }
                    Ok((sq / pairs.len() as f64, err / pairs.len() as f64))
                })
                .collect::<Result<_>>()?;
            let (sq, err): (Vec<f64>, Vec<f64>) = per_trial.into_iter().unzip();
            let boot = derive_seed(settings.master_seed, streams::BOOTSTRAP, (method.id() << 32) | k as u64);
            cells.push(MseCell::from_trials(spec.name(), method, k, s, &sq, &err, boot));
        }
    }
    Ok(MseTable { label_column: "kernel", cells })
}
