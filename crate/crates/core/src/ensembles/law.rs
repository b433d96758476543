use std::fmt;
use std::str::FromStr;

use rand_distr::{ChiSquared, Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::matrix::norm;
use crate::{Error, Result};

/// Shape of an isotropic sampling law; see [`IsotropicLaw`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LawTag {
    /// `N(0, I_d)`.
    GaussianStd,
    /// Uniform on the unit sphere.
    UnitSphere,
    /// `N(0, I_d / λ²)`, the spectral law of a Gaussian kernel with lengthscale λ.
    GaussianScaled { lengthscale: f64 },
    /// Multivariate Student-t with `2ν` degrees of freedom, the spectral law
    /// of a Matérn-ν kernel.
    MaternSpectral { nu: f64 },
    /// Product of standard Laplace coordinates (density ∝ e^{-‖ω‖₁}). Not
    /// isotropic.
    LaplaceProduct,
}

/// A law on `R^d` that factors into a uniform direction and a radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsotropicLaw {
    tag: LawTag,
    dim: usize,
}

impl IsotropicLaw {
    pub fn new(tag: LawTag, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Parameter("law dimension must be positive".into()));
        }
        match tag {
            LawTag::GaussianScaled { lengthscale } if !(lengthscale > 0.0 && lengthscale.is_finite()) => {
                Err(Error::Parameter(format!("lengthscale must be positive, got {lengthscale}")))
            }
            LawTag::MaternSpectral { nu } if !(nu > 0.0 && nu.is_finite()) => {
                Err(Error::Parameter(format!("matern nu must be positive, got {nu}")))
            }
            _ => Ok(IsotropicLaw { tag, dim }),
        }
    }

    pub fn gaussian(dim: usize) -> Self {
        IsotropicLaw { tag: LawTag::GaussianStd, dim }
    }

    pub fn sphere(dim: usize) -> Self {
        IsotropicLaw { tag: LawTag::UnitSphere, dim }
    }

    pub fn tag(&self) -> LawTag {
        self.tag
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `false` only for [`LawTag::LaplaceProduct`]. Structured ensembles for a
    /// non-isotropic law match the marginal norm distribution but not the
    /// marginal direction distribution.
    pub fn is_isotropic(&self) -> bool {
        !matches!(self.tag, LawTag::LaplaceProduct)
    }

    /// One draw from the law.
    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match self.tag {
            LawTag::GaussianStd => gaussian_vec(rng, self.dim),
            LawTag::UnitSphere => loop {
                let mut g = gaussian_vec(rng, self.dim);
                let n = norm(&g);
                if n > 0.0 {
                    g.iter_mut().for_each(|x| *x /= n);
                    break g;
                }
            },
            LawTag::GaussianScaled { lengthscale } => {
                let mut g = gaussian_vec(rng, self.dim);
                g.iter_mut().for_each(|x| *x /= lengthscale);
                g
            }
            LawTag::MaternSpectral { nu } => {
                let mut g = gaussian_vec(rng, self.dim);
                let scale = student_scale(rng, 2.0 * nu);
                g.iter_mut().for_each(|x| *x *= scale);
                g
            }
            LawTag::LaplaceProduct => (0..self.dim).map(|_| laplace(rng)).collect(),
        }
    }

    /// One draw of the radius `‖ω‖`.
    pub fn sample_radius<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.tag {
            LawTag::UnitSphere => 1.0,
            _ => norm(&self.sample(rng)),
        }
    }
}

impl fmt::Display for LawTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LawTag::GaussianStd => write!(f, "gaussian"),
            LawTag::UnitSphere => write!(f, "sphere"),
            LawTag::GaussianScaled { lengthscale } => write!(f, "gaussian-scaled:{lengthscale}"),
            LawTag::MaternSpectral { nu } => write!(f, "matern:{nu}"),
            LawTag::LaplaceProduct => write!(f, "laplace-product"),
        }
    }
}

impl FromStr for LawTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s, None),
        };
        let param = |name: &str| -> Result<f64> {
            arg.ok_or_else(|| Error::Parameter(format!("law `{head}` needs a {name}, e.g. `{head}:1.5`")))?
                .parse::<f64>()
                .map_err(|e| Error::Parameter(format!("bad {name} in law `{s}`: {e}")))
        };
        let tag = match head {
            "gaussian" | "gaussian-std" => LawTag::GaussianStd,
            "sphere" | "unit-sphere" => LawTag::UnitSphere,
            "gaussian-scaled" => LawTag::GaussianScaled { lengthscale: param("lengthscale")? },
            "matern" => LawTag::MaternSpectral { nu: param("nu")? },
            "laplace-product" => LawTag::LaplaceProduct,
            other => return Err(Error::Parameter(format!("unknown law `{other}`"))),
        };
        if arg.is_some() && !matches!(tag, LawTag::GaussianScaled { .. } | LawTag::MaternSpectral { .. }) {
            return Err(Error::Parameter(format!("law `{head}` takes no parameter")));
        }
        Ok(tag)
    }
}

impl Serialize for LawTag {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for LawTag {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub(crate) fn gaussian_vec<R: rand::Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

/// `√(k / u)` with `u ~ χ²(k)`: the scale mixing a Gaussian into Student-t.
pub(crate) fn student_scale<R: rand::Rng + ?Sized>(rng: &mut R, dof: f64) -> f64 {
    let chi2 = ChiSquared::new(dof).expect("positive degrees of freedom");
    loop {
        let u: f64 = chi2.sample(rng);
        if u > 0.0 {
            return (dof / u).sqrt();
        }
    }
}

fn laplace<R: rand::Rng + ?Sized>(rng: &mut R) -> f64 {
    let e: f64 = Exp1.sample(rng);
    if rng.random::<bool>() {
        e
    } else {
        -e
    }
}
