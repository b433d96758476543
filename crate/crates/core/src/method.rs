//! Uniform access to every ensemble construction for benchmark loops.

use crate::ensembles::{
    radial_renormalize, random_rotation, rotate_rows, sample_bomc, sample_iid, sample_omc_block, sample_qmc, Ensemble,
    IsotropicLaw, Method,
};
use crate::matrix::Matrix;
use crate::nomc::{alg_nomc_embedded, opt_nomc_build, OptNomcConfig};
use crate::seed::{derive_seed, streams};
use crate::Result;

/// Draws fresh `s`-sample ensembles of one method for repeated trials.
///
/// The particle optimization behind [`Method::OptNomc`] runs once, in
/// [`MethodSampler::new`]; each draw then applies a new Haar rotation and new
/// radii. [`Method::Omc`] falls back to block-orthogonal sampling when
/// `s > d`, and [`Method::AlgNomc`] uses the zero-padded character
/// construction of [`alg_nomc_embedded`].
#[derive(Debug, Clone)]
pub struct MethodSampler {
    method: Method,
    law: IsotropicLaw,
    s: usize,
    optimized: Option<Matrix>,
}

impl MethodSampler {
    pub fn new(method: Method, law: IsotropicLaw, s: usize, opt: &OptNomcConfig) -> Result<Self> {
        let optimized = match method {
            Method::OptNomc => Some(opt_nomc_build(law.dim(), s, opt)?.0.into_rows()),
            _ => None,
        };
        if method == Method::AlgNomc {
            // surface dimension errors at construction time
            alg_nomc_embedded(law.dim(), 1, 0)?;
        }
        Ok(MethodSampler { method, law, s, optimized })
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn draw(&self, seed: u64) -> Result<Ensemble> {
        let (law, s) = (&self.law, self.s);
        match self.method {
            Method::Mc => sample_iid(law, s, seed),
            Method::Qmc => sample_qmc(law, s, seed),
            Method::Omc if s <= law.dim() => sample_omc_block(law, s, seed),
            Method::Omc | Method::Bomc => sample_bomc(law, s, seed),
            Method::OptNomc => {
                let base = self.optimized.as_ref().expect("optimized ensemble built in new()");
                let rotation = random_rotation(law.dim(), derive_seed(seed, streams::ROTATION, 0));
                radial_renormalize(&rotate_rows(base, &rotation), Method::OptNomc, law, seed)
            }
            Method::AlgNomc => radial_renormalize(&alg_nomc_embedded(law.dim(), s, seed)?, Method::AlgNomc, law, seed),
        }
    }
}
