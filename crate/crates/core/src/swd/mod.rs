//! Sliced Wasserstein distance estimation over point clouds.

mod distributions;
mod transport;

use std::io::Write as _;
use std::path::Path;

use rayon::prelude::*;

pub use distributions::{
    make_cov, benchmark_pair, psd_factor, sample_distribution, CovKind, CovRecipe, DistClass, DistKind, DistributionSpec,
};
pub use transport::{project_cloud, projected_costs, swd_estimate, swd_from_directions, wasserstein_1d};

use crate::ensembles::{sample_bomc, IsotropicLaw};
use crate::kernels::{load_csv_matrix, BenchSettings};
use crate::matrix::{dot, Matrix};
use crate::method::MethodSampler;
use crate::seed::{derive_seed, rng, streams};
use crate::stats;
use crate::table::{MseCell, MseTable};
use crate::{Error, Result};

/// A finite point set in `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    points: Matrix,
}

impl PointCloud {
    pub fn new(points: Matrix) -> Result<Self> {
        if points.nrows() == 0 || points.ncols() == 0 {
            return Err(Error::Arity("a point cloud needs at least one point of positive dimension".into()));
        }
        if !points.is_finite() {
            return Err(Error::Parameter("point cloud has non-finite entries".into()));
        }
        Ok(PointCloud { points })
    }

    pub fn points(&self) -> &Matrix {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.points.ncols()
    }

    /// Headerless CSV, 17 significant digits.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        for row in self.points.rows_iter() {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        std::fs::File::create(path)
            .and_then(|mut f| f.write_all(out.as_bytes()))
            .map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::new(load_csv_matrix(path)?)
    }
}

/// Directions used by [`gaussian_swd_oracle`] unless overridden.
pub const ORACLE_DIRECTIONS: usize = 1_000_000;
const ORACLE_BATCHES: usize = 1000;

/// Sliced 2-Wasserstein distance between `N(m1, Σ1)` and `N(m2, Σ2)`.
///
/// Along a direction u the projected laws are one-dimensional Gaussians,
/// so `W_2² = (uᵀΔm)² + (√(uᵀΣ1u) − √(uᵀΣ2u))²` exactly; only the average over
/// the sphere is estimated. The half-width is a 95% percentile bootstrap over
/// batch means, mapped through the square root.
pub fn gaussian_swd_oracle(
    m1: &[f64],
    s1: &Matrix,
    m2: &[f64],
    s2: &Matrix,
    n_directions: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    let d = m1.len();
    if d == 0 || m2.len() != d {
        return Err(Error::Arity(format!("means of lengths {} and {}", m1.len(), m2.len())));
    }
    if [s1, s2].iter().any(|s| s.nrows() != d || s.ncols() != d) {
        return Err(Error::Arity(format!("covariances must be {d}×{d}")));
    }
    psd_factor(s1)?;
    psd_factor(s2)?;
    if n_directions == 0 {
        return Err(Error::Arity("oracle needs at least one direction".into()));
    }
    let dm: Vec<f64> = m1.iter().zip(m2).map(|(a, b)| a - b).collect();
    let quad = |s: &Matrix, u: &[f64]| s.rows_iter().zip(u).map(|(row, ui)| ui * dot(row, u)).sum::<f64>().max(0.0);
    let batches = ORACLE_BATCHES.min(n_directions);
    let sums: Vec<f64> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let n = n_directions / batches + usize::from(b < n_directions % batches);
            let mut r = rng(derive_seed(seed, streams::REFERENCE, b as u64));
            let law = IsotropicLaw::sphere(d);
            (0..n)
                .map(|_| {
                    let u = law.sample(&mut r);
                    let shift = dot(&u, &dm);
                    let spread = quad(s1, &u).sqrt() - quad(s2, &u).sqrt();
                    shift * shift + spread * spread
                })
                .sum::<f64>()
        })
        .collect();
    let value = sums.iter().sum::<f64>() / n_directions as f64;
    if batches < 2 {
        return Ok((value.sqrt(), 0.0));
    }
    let means: Vec<f64> = sums
        .iter()
        .enumerate()
        .map(|(b, s)| s / (n_directions / batches + usize::from(b < n_directions % batches)) as f64)
        .collect();
    let ci = stats::bootstrap_mean(&means, stats::BOOTSTRAP_RESAMPLES, 0.95, derive_seed(seed, streams::BOOTSTRAP, 0));
    let half = 0.5 * (ci.hi.max(0.0).sqrt() - ci.lo.max(0.0).sqrt());
    Ok((value.sqrt(), half))
}

/// Reference SWD of fixed clouds from a large block-orthogonal direction set.
pub fn reference_swd(a: &PointCloud, b: &PointCloud, directions: usize, p: f64, seed: u64) -> Result<f64> {
    let dirs = sample_bomc(&IsotropicLaw::sphere(a.dim()), directions, derive_seed(seed, streams::REFERENCE, 0))?;
    swd_estimate(a, b, &dirs, p)
}

/// Result of [`swd_benchmark`].
#[derive(Debug, Clone, PartialEq)]
pub struct SwdBenchmark {
    pub table: MseTable,
    /// Reference distance every estimate is compared against.
    pub truth: f64,
}

/// MSE of SWD estimates between two fixed clouds.
///
/// `truth` is the reference distance; each trial draws `s = k·d` fresh
/// directions per method.
pub fn swd_benchmark(
    label: &str,
    a: &PointCloud,
    b: &PointCloud,
    truth: f64,
    p: f64,
    settings: &BenchSettings,
) -> Result<SwdBenchmark> {
    settings.validate()?;
    if a.dim() != settings.d {
        return Err(Error::Arity(format!("clouds of dimension {} in a d = {} benchmark", a.dim(), settings.d)));
    }
    let law = IsotropicLaw::sphere(settings.d);
    let mut cells = Vec::new();
    for &method in &settings.methods {
        for &k in &settings.multipliers {
            let s = k * settings.d;
            let sampler = MethodSampler::new(method, law, s, &settings.opt_for(s))?;
            let errors: Vec<f64> = (0..settings.trials)
                .map(|t| {
                    let dirs = sampler.draw(settings.ensemble_seed(method, k, t))?;
                    Ok(swd_estimate(a, b, &dirs, p)? - truth)
                })
                .collect::<Result<_>>()?;
            let sq: Vec<f64> = errors.iter().map(|e| e * e).collect();
            let boot = derive_seed(settings.master_seed, streams::BOOTSTRAP, (method.id() << 32) | k as u64);
            cells.push(MseCell::from_trials(label, method, k, s, &sq, &errors, boot));
        }
    }
    Ok(SwdBenchmark { table: MseTable { label_column: "distribution", cells }, truth })
}
