use std::f64::consts::TAU;

use rand::Rng as _;

use super::spec::{KernelFamily, KernelSpec};
use crate::ensembles::Ensemble;
use crate::matrix::dot;
use crate::seed::rng;
use crate::stats;
use crate::{Error, Result};

/// An ensemble turned into a random feature map for one kernel.
#[derive(Debug, Clone)]
pub struct FeatureBundle {
    ensemble: Ensemble,
    phases: Option<Vec<f64>>,
    spec: KernelSpec,
}

impl FeatureBundle {
    /// `phases` must be present (one per row) exactly for shift-invariant kernels.
    pub fn new(spec: KernelSpec, ensemble: Ensemble, phases: Option<Vec<f64>>) -> Result<Self> {
        spec.validate()?;
        match (spec.family(), &phases) {
            (KernelFamily::ShiftInvariant, Some(b)) if b.len() == ensemble.s() => {}
            (KernelFamily::ShiftInvariant, _) => {
                return Err(Error::Arity(format!("{spec} features need exactly {} phases", ensemble.s())))
            }
            (KernelFamily::Png, Some(_)) => return Err(Error::Arity(format!("{spec} features take no phases"))),
            (KernelFamily::Png, None) => {}
        }
        Ok(FeatureBundle { ensemble, phases, spec })
    }

    /// Draws the phases `b_i ~ Unif[0, 2π)` from `phase_seed` when the kernel needs them.
    pub fn with_random_phases(spec: KernelSpec, ensemble: Ensemble, phase_seed: u64) -> Result<Self> {
        let phases = (spec.family() == KernelFamily::ShiftInvariant).then(|| draw_phases(ensemble.s(), phase_seed));
        FeatureBundle::new(spec, ensemble, phases)
    }

    pub fn ensemble(&self) -> &Ensemble {
        &self.ensemble
    }

    pub fn phases(&self) -> Option<&[f64]> {
        self.phases.as_deref()
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    /// Feature map `φ(x)` of length `s`.
    pub fn feature_vector(&self, x: &[f64]) -> Result<Vec<f64>> {
        let d = self.ensemble.d();
        if x.len() != d {
            return Err(Error::Arity(format!("point has dimension {} but features expect {d}", x.len())));
        }
        let s = self.ensemble.s() as f64;
        let rows = self.ensemble.rows().rows_iter();
        Ok(match (self.spec, &self.phases) {
            (spec, Some(phases)) => {
                let amp = (2.0 * spec.amplitude_sq(d) / s).sqrt();
                rows.zip(phases).map(|(w, b)| amp * (dot(w, x) + b).cos()).collect()
            }
            (spec, None) => {
                let amp = 1.0 / s.sqrt();
                rows.map(|w| amp * png_nonlinearity(&spec, dot(w, x))).collect()
            }
        })
    }

    /// `⟨φ(x), φ(y)⟩`.
    pub fn approx_kernel(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        Ok(dot(&self.feature_vector(x)?, &self.feature_vector(y)?))
    }
}

/// The pointwise nonlinearity `h` of a PNG kernel.
pub fn png_nonlinearity(spec: &KernelSpec, u: f64) -> f64 {
    match *spec {
        KernelSpec::Angular => {
            if u > 0.0 {
                1.0
            } else if u < 0.0 {
                -1.0
            } else {
                0.0
            }
        }
        KernelSpec::Quadratic => u * u,
        KernelSpec::Tanh => u.tanh(),
        KernelSpec::Sine => u.sin(),
        KernelSpec::ExpPng { c } => (c * u).exp(),
        _ => panic!("{spec} is not a PNG kernel"),
    }
}

pub fn draw_phases(s: usize, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    (0..s).map(|_| TAU * r.random::<f64>()).collect()
}

/// Plain Monte Carlo estimate of `K(x, y)` from `samples` iid spectral draws,
/// with a 95% normal half-width. Independent of the feature-map code path;
/// used to cross-check closed forms.
pub fn mc_kernel_oracle(spec: &KernelSpec, x: &[f64], y: &[f64], samples: usize, seed: u64) -> Result<(f64, f64)> {
    let law = super::spec::spectral_law(spec, x.len())?;
    let mut r = rng(seed);
    let amp = spec.amplitude_sq(x.len());
    let z: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    let values: Vec<f64> = (0..samples)
        .map(|_| {
            let w = law.sample(&mut r);
            match spec.family() {
                KernelFamily::ShiftInvariant => amp * dot(&w, &z).cos(),
                KernelFamily::Png => png_nonlinearity(spec, dot(&w, x)) * png_nonlinearity(spec, dot(&w, y)),
            }
        })
        .collect();
    Ok((stats::mean(&values), stats::Z95 * stats::std_err(&values)))
}
