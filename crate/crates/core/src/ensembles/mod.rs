//! Sample ensembles for isotropic laws: iid, orthogonal, block-orthogonal and
//! randomized Halton, plus Haar rotations and radial renormalization.

mod halton;
mod law;
mod normal;
mod orth;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::matrix::{norm, Matrix};
use crate::seed::{derive_seed, rng, streams};
use crate::{Error, Result};

pub use halton::{halton_point, qmc_gaussian_points, radical_inverse, sample_qmc, HALTON_SKIP, MAX_HALTON_DIMS};
pub use law::{IsotropicLaw, LawTag};
pub use normal::{inverse_normal_cdf, normal_cdf};
pub use orth::{block_sizes, gram_schmidt, random_rotation, sample_bomc, sample_omc_block, DEGENERACY_TOL};

pub(crate) use law::{gaussian_vec, student_scale};

/// How an ensemble was constructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Mc,
    Qmc,
    Omc,
    Bomc,
    OptNomc,
    AlgNomc,
}

impl Method {
    pub const ALL: [Method; 6] = [Method::Mc, Method::Qmc, Method::Omc, Method::Bomc, Method::OptNomc, Method::AlgNomc];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Mc => "mc",
            Method::Qmc => "qmc",
            Method::Omc => "omc",
            Method::Bomc => "bomc",
            Method::OptNomc => "opt-nomc",
            Method::AlgNomc => "alg-nomc",
        }
    }

    /// Small stable integer used to derive per-method seeds.
    pub fn id(&self) -> u64 {
        *self as u64
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Parameter(format!("unknown method `{s}`")))
    }
}

/// An `s × d` matrix of samples (one per row) with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    rows: Matrix,
    method: Method,
    law: IsotropicLaw,
    seed: u64,
    block_size: Option<usize>,
}

impl Ensemble {
    pub fn new(rows: Matrix, method: Method, law: IsotropicLaw, seed: u64, block_size: Option<usize>) -> Result<Self> {
        if rows.nrows() == 0 || rows.ncols() == 0 {
            return Err(Error::Arity("ensemble must have at least one row and one column".into()));
        }
        if rows.ncols() != law.dim() {
            return Err(Error::Dimension(format!(
                "rows have {} columns but the law lives in dimension {}",
                rows.ncols(),
                law.dim()
            )));
        }
        if !rows.is_finite() {
            return Err(Error::Domain("ensemble entries must be finite".into()));
        }
        if block_size == Some(0) {
            return Err(Error::Parameter("block size must be positive".into()));
        }
        Ok(Ensemble { rows, method, law, seed, block_size })
    }

    pub fn rows(&self) -> &Matrix {
        &self.rows
    }

    pub fn into_rows(self) -> Matrix {
        self.rows
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn law(&self) -> &IsotropicLaw {
        &self.law
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn block_size(&self) -> Option<usize> {
        self.block_size
    }

    /// Number of samples.
    pub fn s(&self) -> usize {
        self.rows.nrows()
    }

    pub fn d(&self) -> usize {
        self.rows.ncols()
    }

    /// Applies `ω ↦ Rω` to every sample (rows become `E·Rᵀ`).
    pub fn rotated(&self, rotation: &Matrix) -> Ensemble {
        Ensemble { rows: rotate_rows(&self.rows, rotation), ..self.clone() }
    }

    /// Largest normalized `|⟨ω_i, ω_j⟩|` over distinct rows sharing a block.
    /// Zero when no block holds two rows.
    pub fn max_within_block_dot(&self) -> f64 {
        let block = self.block_size.unwrap_or(self.s());
        let mut worst = 0.0f64;
        for start in (0..self.s()).step_by(block) {
            let end = (start + block).min(self.s());
            for i in start..end {
                for j in start..i {
                    let (a, b) = (self.rows.row(i), self.rows.row(j));
                    let c = crate::matrix::dot(a, b) / (norm(a) * norm(b));
                    worst = worst.max(c.abs());
                }
            }
        }
        worst
    }
}

/// Rows of `rows · rotationᵀ`.
pub fn rotate_rows(rows: &Matrix, rotation: &Matrix) -> Matrix {
    assert_eq!(rotation.nrows(), rows.ncols(), "rotation dimension mismatch");
    rows.matmul(&rotation.transpose())
}

/// `s` independent draws from `law`.
pub fn sample_iid(law: &IsotropicLaw, s: usize, seed: u64) -> Result<Ensemble> {
    if s == 0 {
        return Err(Error::Arity("ensemble needs at least one sample".into()));
    }
    let mut r = rng(seed);
    let data: Vec<f64> = (0..s).flat_map(|_| law.sample(&mut r)).collect();
    Ensemble::new(Matrix::from_vec(s, law.dim(), data), Method::Mc, *law, seed, None)
}

/// Rescales unit-norm rows by independent radii drawn from `law`.
///
/// The result keeps `method` and carries `law`. Rows must be unit within 1e-8.
pub fn radial_renormalize(directions: &Matrix, method: Method, law: &IsotropicLaw, seed: u64) -> Result<Ensemble> {
    for (i, row) in directions.rows_iter().enumerate() {
        let n = norm(row);
        if (n - 1.0).abs() > 1e-8 {
            return Err(Error::Precondition(format!("row {i} has norm {n}, expected a unit direction")));
        }
    }
    let mut rows = directions.clone();
    let mut r = rng(derive_seed(seed, streams::RADII, 0));
    for i in 0..rows.nrows() {
        let radius = law.sample_radius(&mut r);
        rows.row_mut(i).iter_mut().for_each(|x| *x *= radius);
    }
    Ensemble::new(rows, method, *law, seed, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iid_is_seeded() {
        let law = IsotropicLaw::gaussian(3);
        assert_eq!(sample_iid(&law, 2, 7).unwrap(), sample_iid(&law, 2, 7).unwrap());
        assert_ne!(sample_iid(&law, 2, 7).unwrap().rows(), sample_iid(&law, 2, 8).unwrap().rows());
    }

    #[test]
    fn iid_sphere_rows_are_unit() {
        let e = sample_iid(&IsotropicLaw::sphere(4), 5, 1).unwrap();
        assert!(e.rows().rows_iter().all(|r| (norm(r) - 1.0).abs() <= 1e-12));
    }

    #[test]
    fn chi_square_moment_of_gaussian_rows() {
        let d = 8;
        let e = sample_iid(&IsotropicLaw::gaussian(d), 100_000, 3).unwrap();
        let sq: Vec<f64> = e.rows().rows_iter().map(|r| norm(r).powi(2)).collect();
        // E‖ω‖² = d, Var = 2d
        let se = crate::stats::std_err(&sq);
        assert!((crate::stats::mean(&sq) - d as f64).abs() < 3.0 * se);
        assert!((se - (2.0 * d as f64 / 1e5).sqrt()).abs() < 1e-3);
    }

    #[test]
    fn renormalize_on_sphere_is_identity() {
        let dirs = sample_iid(&IsotropicLaw::sphere(3), 10, 4).unwrap().into_rows();
        let out = radial_renormalize(&dirs, Method::Mc, &IsotropicLaw::sphere(3), 1).unwrap();
        assert_eq!(out.rows(), &dirs);
    }

    #[test]
    fn renormalize_preserves_directions() {
        let dirs = sample_iid(&IsotropicLaw::sphere(2), 10, 4).unwrap().into_rows();
        let out = radial_renormalize(&dirs, Method::Mc, &IsotropicLaw::gaussian(2), 1).unwrap();
        for (a, b) in out.rows().rows_iter().zip(dirs.rows_iter()) {
            let n = norm(a);
            assert!(a.iter().zip(b).all(|(x, y)| (x / n - y).abs() <= 1e-10));
        }
    }

    #[test]
    fn renormalize_rejects_non_unit_rows() {
        let m = Matrix::from_rows(&[[2.0, 0.0]]);
        assert!(matches!(
            radial_renormalize(&m, Method::Mc, &IsotropicLaw::gaussian(2), 0),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn method_tags_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
            assert_eq!(serde_json::to_string(&m).unwrap(), format!("\"{m}\""));
        }
    }
}
