//! Kernel descriptions, their spectral laws and exact evaluations.

use std::f64::consts::{FRAC_2_PI, PI};
use std::fmt;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::ensembles::{IsotropicLaw, LawTag};
use crate::matrix::{dot, norm, sq_dist};
use crate::{Error, Result};

fn one() -> f64 {
    1.0
}

/// A kernel that random features can approximate.
///
/// Shift-invariant kernels use `cos(ωᵀx + b)` features with ω drawn from the
/// kernel's spectral law. Pointwise-nonlinear Gaussian (PNG) kernels
/// `E[h(ωᵀx) h(ωᵀy)]`, ω ~ N(0, I), use `h(ωᵀx)` features.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", from = "SpecRepr")]
pub enum KernelSpec {
    /// `σ² exp(-‖x-y‖² / (2λ²))`.
    Gaussian {
        #[serde(default = "one")]
        sigma: f64,
        #[serde(default = "one")]
        lengthscale: f64,
    },
    /// `σ² 2^{1-ν}/Γ(ν) (√(2ν) z)^ν K_ν(√(2ν) z)` with `z = ‖x-y‖`.
    Matern {
        #[serde(default = "one")]
        sigma: f64,
        nu: f64,
    },
    /// `Π_k 2 / (1 + (x_k - y_k)²)`.
    Cauchy,
    /// `1 - 2θ/π`, θ the angle between x and y; `h = sgn`.
    Angular,
    /// `h(u) = u²`.
    Quadratic,
    /// `h(u) = tanh u`.
    Tanh,
    /// `h(u) = sin u`.
    Sine,
    /// `h(u) = e^{cu}`.
    ExpPng { c: f64 },
}

// Serde ignores extra keys on unit variants of tagged enums; empty struct
// variants let `deny_unknown_fields` reject them.
#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum SpecRepr {
    Gaussian {
        #[serde(default = "one")]
        sigma: f64,
        #[serde(default = "one")]
        lengthscale: f64,
    },
    Matern {
        #[serde(default = "one")]
        sigma: f64,
        nu: f64,
    },
    Cauchy {},
    Angular {},
    Quadratic {},
    Tanh {},
    Sine {},
    ExpPng {
        c: f64,
    },
}

impl From<SpecRepr> for KernelSpec {
    fn from(r: SpecRepr) -> Self {
        match r {
            SpecRepr::Gaussian { sigma, lengthscale } => KernelSpec::Gaussian { sigma, lengthscale },
            SpecRepr::Matern { sigma, nu } => KernelSpec::Matern { sigma, nu },
            SpecRepr::Cauchy {} => KernelSpec::Cauchy,
            SpecRepr::Angular {} => KernelSpec::Angular,
            SpecRepr::Quadratic {} => KernelSpec::Quadratic,
            SpecRepr::Tanh {} => KernelSpec::Tanh,
            SpecRepr::Sine {} => KernelSpec::Sine,
            SpecRepr::ExpPng { c } => KernelSpec::ExpPng { c },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelFamily {
    ShiftInvariant,
    Png,
}

impl KernelSpec {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Parameter(format!("kernel {name} must be positive, got {v}")))
            }
        };
        match *self {
            KernelSpec::Gaussian { sigma, lengthscale } => {
                positive("sigma", sigma)?;
                positive("lengthscale", lengthscale)
            }
            KernelSpec::Matern { sigma, nu } => {
                positive("sigma", sigma)?;
                positive("nu", nu)
            }
            KernelSpec::ExpPng { c } if c == 0.0 || !c.is_finite() => {
                Err(Error::Parameter(format!("exp-png needs a finite non-zero c, got {c}")))
            }
            _ => Ok(()),
        }
    }

    pub fn family(&self) -> KernelFamily {
        match self {
            KernelSpec::Gaussian { .. } | KernelSpec::Matern { .. } | KernelSpec::Cauchy => KernelFamily::ShiftInvariant,
            _ => KernelFamily::Png,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            KernelSpec::Gaussian { .. } => "gaussian",
            KernelSpec::Matern { .. } => "matern",
            KernelSpec::Cauchy => "cauchy",
            KernelSpec::Angular => "angular",
            KernelSpec::Quadratic => "quadratic",
            KernelSpec::Tanh => "tanh",
            KernelSpec::Sine => "sine",
            KernelSpec::ExpPng { .. } => "exp-png",
        }
    }

    /// Value of a shift-invariant kernel at zero shift, in dimension `d`.
    /// Cos features are scaled by its square root so that feature inner
    /// products are unbiased for the kernel as stated.
    pub fn amplitude_sq(&self, d: usize) -> f64 {
        match *self {
            KernelSpec::Gaussian { sigma, .. } | KernelSpec::Matern { sigma, .. } => sigma * sigma,
            // the spectral density e^{-‖ω‖₁} has mass 2^d
            KernelSpec::Cauchy => 2f64.powi(d as i32),
            _ => 1.0,
        }
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Sampling law of ω for `spec` in dimension `d`.
pub fn spectral_law(spec: &KernelSpec, d: usize) -> Result<IsotropicLaw> {
    spec.validate()?;
    let tag = match *spec {
        KernelSpec::Gaussian { lengthscale: 1.0, .. } => LawTag::GaussianStd,
        KernelSpec::Gaussian { lengthscale, .. } => LawTag::GaussianScaled { lengthscale },
        KernelSpec::Matern { nu, .. } => LawTag::MaternSpectral { nu },
        KernelSpec::Cauchy => LawTag::LaplaceProduct,
        _ => LawTag::GaussianStd,
    };
    IsotropicLaw::new(tag, d)
}

/// Exact kernel value.
///
/// Closed forms everywhere except Tanh, which is integrated numerically over
/// the bivariate normal law of `(ωᵀx, ωᵀy)`.
pub fn exact_kernel(spec: &KernelSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    spec.validate()?;
    if x.len() != y.len() {
        return Err(Error::Arity(format!("points have dimensions {} and {}", x.len(), y.len())));
    }
    if !x.iter().chain(y).all(|v| v.is_finite()) {
        return Err(Error::Domain("kernel arguments must be finite".into()));
    }
    Ok(match *spec {
        KernelSpec::Gaussian { sigma, lengthscale } => {
            sigma * sigma * (-sq_dist(x, y) / (2.0 * lengthscale * lengthscale)).exp()
        }
        KernelSpec::Matern { sigma, nu } => sigma * sigma * matern_correlation(nu, sq_dist(x, y).sqrt()),
        KernelSpec::Cauchy => x.iter().zip(y).map(|(a, b)| 2.0 / (1.0 + (a - b) * (a - b))).product(),
        KernelSpec::Angular => {
            let (nx, ny) = (norm(x), norm(y));
            if nx == 0.0 || ny == 0.0 {
                return Err(Error::Domain("angular kernel is undefined at the origin".into()));
            }
            let theta = (dot(x, y) / (nx * ny)).clamp(-1.0, 1.0).acos();
            1.0 - FRAC_2_PI * theta
        }
        KernelSpec::Quadratic => {
            let xy = dot(x, y);
            dot(x, x) * dot(y, y) + 2.0 * xy * xy
        }
        KernelSpec::Sine => {
            let plus: f64 = x.iter().zip(y).map(|(a, b)| (a + b) * (a + b)).sum();
            0.5 * ((-0.5 * sq_dist(x, y)).exp() - (-0.5 * plus).exp())
        }
        KernelSpec::ExpPng { c } => {
            let plus: f64 = x.iter().zip(y).map(|(a, b)| (a + b) * (a + b)).sum();
            (0.5 * c * c * plus).exp()
        }
        KernelSpec::Tanh => png_quadrature(f64::tanh, x, y),
    })
}

/// `E[h(ωᵀx) h(ωᵀy)]` for ω ~ N(0, I) by a tensor trapezoid rule on the
/// standard bivariate normal. Accurate to ~1e-12 for smooth, bounded `h`.
pub fn png_quadrature(h: impl Fn(f64) -> f64, x: &[f64], y: &[f64]) -> f64 {
    const HALF_WIDTH: f64 = 9.0;
    const STEP: f64 = 0.01;
    let (nx, ny) = (norm(x), norm(y));
    if nx == 0.0 || ny == 0.0 {
        return h(0.0) * if nx == 0.0 && ny == 0.0 { h(0.0) } else { png_quadrature_1d(&h, nx.max(ny)) };
    }
    let rho = (dot(x, y) / (nx * ny)).clamp(-1.0, 1.0);
    let perp = (1.0 - rho * rho).max(0.0).sqrt();
    let n = (2.0 * HALF_WIDTH / STEP).round() as usize;
    let nodes: Vec<(f64, f64)> = (0..=n)
        .map(|k| {
            let g = -HALF_WIDTH + k as f64 * STEP;
            (g, STEP * (-0.5 * g * g).exp() / (2.0 * PI).sqrt())
        })
        .collect();
    let mut total = 0.0;
    for &(g1, w1) in &nodes {
        let inner: f64 = nodes.iter().map(|&(g2, w2)| w2 * h(ny * (rho * g1 + perp * g2))).sum();
        total += w1 * h(nx * g1) * inner;
    }
    total
}

fn png_quadrature_1d(h: &impl Fn(f64) -> f64, scale: f64) -> f64 {
    let step = 0.01;
    (0..=1800)
        .map(|k| {
            let g = -9.0 + k as f64 * step;
            step * (-0.5 * g * g).exp() / (2.0 * PI).sqrt() * h(scale * g)
        })
        .sum()
}

/// Matérn correlation at distance `z` (value 1 at `z = 0`).
///
/// Exp-polynomial closed forms for ν ∈ {1/2, 3/2, 5/2}, the Bessel form
/// otherwise.
pub fn matern_correlation(nu: f64, z: f64) -> f64 {
    if z == 0.0 {
        return 1.0;
    }
    if nu == 0.5 {
        (-z).exp()
    } else if nu == 1.5 {
        let t = 3f64.sqrt() * z;
        (1.0 + t) * (-t).exp()
    } else if nu == 2.5 {
        let t = 5f64.sqrt() * z;
        (1.0 + t + t * t / 3.0) * (-t).exp()
    } else {
        matern_bessel(nu, z)
    }
}

/// Matérn correlation through the modified Bessel function `K_ν`.
pub fn matern_bessel(nu: f64, z: f64) -> f64 {
    if z == 0.0 {
        return 1.0;
    }
    let t = (2.0 * nu).sqrt() * z;
    ((1.0 - nu) * 2f64.ln() - ln_gamma(nu) + nu * t.ln() + ln_bessel_k(nu, t)).exp()
}

/// `ln K_ν(t)` for `t > 0` from `K_ν(t) = ∫_0^∞ e^{-t cosh u} cosh(νu) du`.
///
/// The integrand is even and entire in `u`, so the trapezoid rule converges
/// geometrically. Factoring out `e^{-t}` and the peak keeps it in range.
pub fn ln_bessel_k(nu: f64, t: f64) -> f64 {
    assert!(t > 0.0, "bessel argument must be positive");
    let nu = nu.abs();
    let log_term = |u: f64| -t * (u.cosh() - 1.0) + nu * u + (0.5 * (1.0 + (-2.0 * nu * u).exp())).ln();
    // peak of -t(cosh u - 1) + νu sits at sinh u = ν/t
    let peak_u = (nu / t).asinh();
    let peak = log_term(peak_u).max(log_term(0.0));
    let step = (0.02f64).min(0.5 / (1.0 + nu));
    let mut sum = 0.5 * (log_term(0.0) - peak).exp();
    let mut k = 1;
    loop {
        let u = k as f64 * step;
        let v = (log_term(u) - peak).exp();
        sum += v;
        if u > peak_u && v < 1e-18 * sum {
            break;
        }
        k += 1;
    }
    -t + peak + (sum * step).ln()
}
