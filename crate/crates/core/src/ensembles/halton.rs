//! Randomized Halton points pushed onto isotropic laws.

use std::sync::OnceLock;

use rand::Rng as _;

use crate::ensembles::normal::inverse_normal_cdf;
use crate::ensembles::{Ensemble, IsotropicLaw, Method};
use crate::matrix::{norm, Matrix};
use crate::seed::{derive_seed, rng, streams};
use crate::{Error, Result};

/// Number of prime bases available, hence the largest supported dimension.
pub const MAX_HALTON_DIMS: usize = 512;

/// Leading points of the sequence that are skipped.
pub const HALTON_SKIP: u64 = 20;

fn primes() -> &'static [u64] {
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        // the 512th prime is 3671
        let limit = 3700usize;
        let mut composite = vec![false; limit + 1];
        let mut out = Vec::with_capacity(MAX_HALTON_DIMS);
        for n in 2..=limit {
            if composite[n] {
                continue;
            }
            out.push(n as u64);
            if out.len() == MAX_HALTON_DIMS {
                break;
            }
            for m in (n * n..=limit).step_by(n) {
                composite[m] = true;
            }
        }
        out
    })
}

/// Van der Corput radical inverse of `index` in `base`.
pub fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut scale = inv;
    let mut out = 0.0;
    while index > 0 {
        out += (index % base) as f64 * scale;
        index /= base;
        scale *= inv;
    }
    out
}

/// The `index`-th Halton point (1-based) in `[0,1)^dims`.
pub fn halton_point(index: u64, dims: usize) -> Result<Vec<f64>> {
    if index == 0 || dims == 0 {
        return Err(Error::Domain("halton index and dimension must be positive".into()));
    }
    if dims > MAX_HALTON_DIMS {
        return Err(Error::Capacity(format!(
            "halton points support at most {MAX_HALTON_DIMS} dimensions, requested {dims}"
        )));
    }
    Ok(primes()[..dims].iter().map(|&b| radical_inverse(index, b)).collect())
}

/// Cranley–Patterson shifted Halton points mapped coordinatewise through the
/// normal quantile: `s` rows whose marginal law is `N(0, I_d)`.
pub fn qmc_gaussian_points(d: usize, s: usize, seed: u64) -> Result<Matrix> {
    let mut shift_rng = rng(derive_seed(seed, streams::QMC_SHIFT, 0));
    let shift: Vec<f64> = (0..d).map(|_| shift_rng.random::<f64>()).collect();
    let mut data = Vec::with_capacity(s * d);
    for i in 0..s as u64 {
        let h = halton_point(HALTON_SKIP + 1 + i, d)?;
        for (hj, sj) in h.into_iter().zip(&shift) {
            let mut u = hj + sj;
            if u >= 1.0 {
                u -= 1.0;
            }
            data.push(inverse_normal_cdf(u.max(f64::MIN_POSITIVE))?);
        }
    }
    Ok(Matrix::from_vec(s, d, data))
}

/// Randomized QMC ensemble: Gaussianized Halton points normalized to unit
/// directions, then given independent radii from `law`.
pub fn sample_qmc(law: &IsotropicLaw, s: usize, seed: u64) -> Result<Ensemble> {
    if s == 0 {
        return Err(Error::Arity("ensemble needs at least one sample".into()));
    }
    let d = law.dim();
    let mut rows = qmc_gaussian_points(d, s, seed)?;
    let mut radii = rng(derive_seed(seed, streams::RADII, 0));
    for i in 0..s {
        let row = rows.row_mut(i);
        let n = norm(row);
        let radius = law.sample_radius(&mut radii);
        if n > 0.0 {
            row.iter_mut().for_each(|x| *x *= radius / n);
        } else {
            // measure-zero: all coordinates exactly at the median
            row[0] = radius;
        }
    }
    Ensemble::new(rows, Method::Qmc, *law, seed, None)
}
