use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::Rng as _;
use rand_distr::{ChiSquared, Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::PointCloud;
use crate::ensembles::{gaussian_vec, student_scale};
use crate::matrix::Matrix;
use crate::seed::{derive_seed, rng, streams};
use crate::{Error, Result};

const CHUNK: usize = 512;
const PSD_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CovKind {
    /// `√d·AᵀA`.
    MFull,
    /// `diag(a_11², …, a_dd²)`.
    DDiag,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CovRecipe {
    pub kind: CovKind,
    pub d: usize,
    pub seed: u64,
}

/// Builds a random covariance matrix from a standard Gaussian `d×d` draw `A`.
pub fn make_cov(recipe: CovRecipe) -> Result<Matrix> {
    let d = recipe.d;
    if d == 0 {
        return Err(Error::Parameter("covariance dimension must be positive".into()));
    }
    let mut r = rng(recipe.seed);
    let a = Matrix::from_vec(d, d, gaussian_vec(&mut r, d * d));
    Ok(match recipe.kind {
        CovKind::MFull => {
            let scale = (d as f64).sqrt();
            let ata = a.transpose().matmul(&a);
            let mut out = Matrix::zeros(d, d);
            for i in 0..d {
                for j in 0..d {
                    // symmetrize exactly
                    let v = if i <= j { ata[(i, j)] } else { ata[(j, i)] };
                    out.row_mut(i)[j] = scale * v;
                }
            }
            out
        }
        CovKind::DDiag => {
            let mut out = Matrix::zeros(d, d);
            for i in 0..d {
                out.row_mut(i)[i] = a[(i, i)] * a[(i, i)];
            }
            out
        }
    })
}

fn to_na(m: &Matrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.nrows(), m.ncols(), m.as_slice())
}

fn from_na(m: &DMatrix<f64>) -> Matrix {
    Matrix::from_vec(m.nrows(), m.ncols(), m.transpose().as_slice().to_vec())
}

pub(crate) fn check_symmetric(cov: &Matrix, what: &str) -> Result<()> {
    let d = cov.nrows();
    if cov.ncols() != d {
        return Err(Error::NotPsd(format!("{what} is {}×{}, not square", d, cov.ncols())));
    }
    let scale = cov.as_slice().iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    for i in 0..d {
        for j in 0..i {
            if (cov[(i, j)] - cov[(j, i)]).abs() > 1e-12 * scale {
                return Err(Error::NotPsd(format!("{what} is not symmetric at ({i}, {j})")));
            }
        }
    }
    Ok(())
}

/// Lower factor `L` with `LLᵀ = Σ`: Cholesky when it succeeds, otherwise the
/// eigen-decomposition square root for singular PSD input.
pub fn psd_factor(cov: &Matrix) -> Result<Matrix> {
    check_symmetric(cov, "covariance")?;
    let m = to_na(cov);
    if let Some(ch) = m.clone().cholesky() {
        return Ok(from_na(&ch.l()));
    }
    let eig = m.symmetric_eigen();
    let scale = eig.eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1.0);
    let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -PSD_TOL * scale {
        return Err(Error::NotPsd(format!("smallest eigenvalue is {min:e}")));
    }
    let root = DMatrix::from_diagonal(&eig.eigenvalues.map(|v| v.max(0.0).sqrt()));
    Ok(from_na(&(&eig.eigenvectors * root)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DistKind {
    Gaussian,
    StudentT { df: f64 },
    Cauchy,
    Laplace,
    GaussianMixture,
    /// One covariance per cloud from inverse-Wishart(ν, Σ), then Gaussian data.
    InverseWishartGaussian { nu: f64 },
}

/// A generative recipe for point clouds.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionSpec {
    kind: DistKind,
    means: Vec<Vec<f64>>,
    covariances: Vec<Matrix>,
    weights: Vec<f64>,
    factors: Vec<Matrix>,
}

impl DistributionSpec {
    /// `weights` may be empty for single-component laws.
    pub fn new(kind: DistKind, means: Vec<Vec<f64>>, covariances: Vec<Matrix>, weights: Vec<f64>) -> Result<Self> {
        let q = means.len();
        if q == 0 || covariances.len() != q {
            return Err(Error::Parameter(format!("{q} means with {} covariances", covariances.len())));
        }
        if kind != DistKind::GaussianMixture && q != 1 {
            return Err(Error::Parameter(format!("{kind:?} takes one component, got {q}")));
        }
        let d = means[0].len();
        if d == 0 || means.iter().any(|m| m.len() != d || m.iter().any(|v| !v.is_finite())) {
            return Err(Error::Parameter("means must be finite vectors of one common dimension".into()));
        }
        if covariances.iter().any(|c| c.nrows() != d || c.ncols() != d) {
            return Err(Error::Parameter(format!("covariances must be {d}×{d}")));
        }
        let weights = if weights.is_empty() { vec![1.0 / q as f64; q] } else { weights };
        if weights.len() != q || weights.iter().any(|w| !(*w >= 0.0)) || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::Parameter("weights must be a probability vector, one per component".into()));
        }
        match kind {
            DistKind::StudentT { df } if !(df > 0.0) => {
                return Err(Error::Parameter(format!("degrees of freedom must be positive, got {df}")))
            }
            DistKind::InverseWishartGaussian { nu } if !(nu > d as f64 - 1.0) => {
                return Err(Error::Parameter(format!("inverse-Wishart needs nu > d - 1 = {}, got {nu}", d - 1)))
            }
            _ => {}
        }
        let factors = covariances
            .iter()
            .map(|c| psd_factor(c).map_err(|e| Error::Parameter(e.to_string())))
            .collect::<Result<_>>()?;
        Ok(DistributionSpec { kind, means, covariances, weights, factors })
    }

    pub fn kind(&self) -> DistKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.means[0].len()
    }

    pub fn means(&self) -> &[Vec<f64>] {
        &self.means
    }

    pub fn covariances(&self) -> &[Matrix] {
        &self.covariances
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

fn affine(mean: &[f64], factor: &Matrix, g: &[f64], scale: f64) -> Vec<f64> {
    mean.iter().zip(factor.rows_iter()).map(|(m, row)| m + scale * crate::matrix::dot(row, g)).collect()
}

/// Inverse-Wishart(ν, Ψ) draw via the Bartlett decomposition of Wishart(ν, Ψ⁻¹).
fn inverse_wishart(psi: &Matrix, nu: f64, seed: u64) -> Result<Matrix> {
    let d = psi.nrows();
    let inv = to_na(psi)
        .cholesky()
        .ok_or_else(|| Error::NotPsd("inverse-Wishart scale must be positive definite".into()))?
        .inverse();
    let l = inv.cholesky().ok_or_else(|| Error::NotPsd("inverse-Wishart scale is ill-conditioned".into()))?.l();
    let mut r = rng(seed);
    let mut a = DMatrix::zeros(d, d);
    for i in 0..d {
        let chi = ChiSquared::new(nu - i as f64).map_err(|e| Error::Parameter(e.to_string()))?;
        a[(i, i)] = chi.sample(&mut r).sqrt();
        for j in 0..i {
            a[(i, j)] = gaussian_vec(&mut r, 1)[0];
        }
    }
    let la = &l * a;
    let w = &la * la.transpose();
    let sigma = w.cholesky().ok_or_else(|| Error::NotPsd("degenerate Wishart draw".into()))?.inverse();
    let sym = (&sigma + sigma.transpose()) * 0.5;
    Ok(from_na(&sym))
}

/// Draws `m` points. Points are generated in fixed chunks with derived seeds,
/// so the cloud does not depend on the thread count.
pub fn sample_distribution(spec: &DistributionSpec, m: usize, seed: u64) -> Result<PointCloud> {
    if m == 0 {
        return Err(Error::Arity("a point cloud needs at least one point".into()));
    }
    let d = spec.dim();
    let iw_factor = match spec.kind {
        DistKind::InverseWishartGaussian { nu } => {
            Some(psd_factor(&inverse_wishart(&spec.covariances[0], nu, derive_seed(seed, streams::COVARIANCE, 0))?)?)
        }
        _ => None,
    };
    let cumulative: Vec<f64> = spec
        .weights
        .iter()
        .scan(0.0, |acc, w| {
            *acc += w;
            Some(*acc)
        })
        .collect();
    let chunks = m.div_ceil(CHUNK);
    let parts: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut r = rng(derive_seed(seed, streams::CLOUD, c as u64));
            let n = CHUNK.min(m - c * CHUNK);
            let mut out = Vec::with_capacity(n * d);
            for _ in 0..n {
                let (mean, factor, scale) = match spec.kind {
                    DistKind::Gaussian => (&spec.means[0], &spec.factors[0], 1.0),
                    DistKind::StudentT { df } => (&spec.means[0], &spec.factors[0], student_scale(&mut r, df)),
                    DistKind::Cauchy => (&spec.means[0], &spec.factors[0], student_scale(&mut r, 1.0)),
                    DistKind::Laplace => {
                        let w: f64 = Exp1.sample(&mut r);
                        (&spec.means[0], &spec.factors[0], w.sqrt())
                    }
                    DistKind::GaussianMixture => {
                        let u: f64 = r.random();
                        let k = cumulative.iter().position(|c| u < *c).unwrap_or(cumulative.len() - 1);
                        (&spec.means[k], &spec.factors[k], 1.0)
                    }
                    DistKind::InverseWishartGaussian { .. } => {
                        (&spec.means[0], iw_factor.as_ref().expect("drawn above"), 1.0)
                    }
                };
                let g = gaussian_vec(&mut r, d);
                out.extend(affine(mean, factor, &g, scale));
            }
            out
        })
        .collect();
    PointCloud::new(Matrix::from_vec(m, d, parts.concat()))
}

/// The distribution classes of the SWD experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistClass {
    Gaussian,
    StudentT,
    Cauchy,
    Laplace,
    #[serde(rename = "mixture-2")]
    Mixture2,
    #[serde(rename = "mixture-3")]
    Mixture3,
    #[serde(rename = "mixture-4")]
    Mixture4,
    InverseWishart,
}

impl DistClass {
    pub const ALL: [DistClass; 8] = [
        DistClass::Gaussian,
        DistClass::StudentT,
        DistClass::Cauchy,
        DistClass::Laplace,
        DistClass::Mixture2,
        DistClass::Mixture3,
        DistClass::Mixture4,
        DistClass::InverseWishart,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            DistClass::Gaussian => "gaussian",
            DistClass::StudentT => "student-t",
            DistClass::Cauchy => "cauchy",
            DistClass::Laplace => "laplace",
            DistClass::Mixture2 => "mixture-2",
            DistClass::Mixture3 => "mixture-3",
            DistClass::Mixture4 => "mixture-4",
            DistClass::InverseWishart => "inverse-wishart",
        }
    }
}

impl fmt::Display for DistClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DistClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DistClass::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::Parameter(format!("unknown distribution class {s:?}")))
    }
}

/// Ones on `start..start+len`, clipped to `d`.
fn indicator(d: usize, start: usize, len: usize) -> Vec<f64> {
    (0..d).map(|i| if i >= start && i < start + len { 1.0 } else { 0.0 }).collect()
}

fn component_means(class: DistClass, d: usize) -> Vec<Vec<f64>> {
    let tail = |len: usize| indicator(d, d.saturating_sub(len), len);
    let middle = |len: usize| indicator(d, d.saturating_sub(len) / 2, len);
    match class {
        DistClass::Mixture2 => vec![tail(d - d / 2), indicator(d, 0, d / 2)],
        DistClass::Mixture3 => vec![indicator(d, 0, 4), tail(3), middle(3)],
        DistClass::Mixture4 => vec![indicator(d, 0, 4), indicator(d, 2, 2), middle(2), tail(2)],
        _ => unreachable!("single-component class"),
    }
}

/// The two distributions compared for one class, with covariances drawn
/// from `seed`.
pub fn benchmark_pair(class: DistClass, d: usize, seed: u64) -> Result<(DistributionSpec, DistributionSpec)> {
    let cov = |kind, k: u64| make_cov(CovRecipe { kind, d, seed: derive_seed(seed, streams::COVARIANCE, k) });
    let (zeros, ones) = (vec![0.0; d], vec![1.0; d]);
    let single = |kind, m1: Vec<f64>, m2: Vec<f64>| -> Result<_> {
        Ok((
            DistributionSpec::new(kind, vec![m1], vec![cov(CovKind::MFull, 0)?], vec![])?,
            DistributionSpec::new(kind, vec![m2], vec![cov(CovKind::MFull, 1)?], vec![])?,
        ))
    };
    match class {
        DistClass::Gaussian => single(DistKind::Gaussian, zeros, ones),
        DistClass::StudentT => single(DistKind::StudentT { df: 10.0 }, zeros, ones),
        DistClass::Cauchy => single(DistKind::Cauchy, zeros, ones),
        DistClass::Laplace => single(DistKind::Laplace, zeros.clone(), zeros),
        DistClass::InverseWishart => single(DistKind::InverseWishartGaussian { nu: 10.0 }, zeros, ones),
        DistClass::Mixture2 | DistClass::Mixture3 | DistClass::Mixture4 => {
            let means = component_means(class, d);
            let mixture = |which: u64| -> Result<DistributionSpec> {
                let covs = (0..means.len() as u64)
                    .map(|k| cov(CovKind::DDiag, 2 + 8 * which + k))
                    .collect::<Result<Vec<_>>>()?;
                DistributionSpec::new(DistKind::GaussianMixture, means.clone(), covs, vec![])
            };
            Ok((mixture(0)?, mixture(1)?))
        }
    }
}
