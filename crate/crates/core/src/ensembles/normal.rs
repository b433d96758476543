//! Standard normal CDF and quantile.

use statrs::function::erf::erfc;

use crate::{Error, Result};

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal quantile function.
///
/// Acklam's rational approximation followed by one Halley step against the
/// erfc-based CDF.
pub fn inverse_normal_cdf(u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::Domain(format!("normal quantile needs u in (0, 1), got {u}")));
    }
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.02425;

    let tail = |q: f64| {
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    let mut x = if u < P_LOW {
        tail((-2.0 * u.ln()).sqrt())
    } else if u <= 1.0 - P_LOW {
        let q = u - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -tail((-2.0 * (1.0 - u).ln()).sqrt())
    };

    let e = normal_cdf(x) - u;
    let step = e * (2.0 * std::f64::consts::PI).sqrt() * (0.5 * x * x).exp();
    if step.is_finite() {
        x -= step / (1.0 + 0.5 * x * step);
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_is_zero() {
        assert_eq!(inverse_normal_cdf(0.5).unwrap(), 0.0);
    }

    #[test]
    fn known_quantile() {
        // qnorm(0.975) = 1.959963984540054
        let q = inverse_normal_cdf(0.975).unwrap();
        assert!((q - 1.959_963_984_540_054).abs() < 1e-9, "{q:.17}");
    }

    #[test]
    fn rejects_out_of_range() {
        for u in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(inverse_normal_cdf(u).is_err(), "{u}");
        }
    }

    #[test]
    fn monotone_on_grid() {
        let n = 10_000;
        let mut prev = f64::NEG_INFINITY;
        for i in 1..n {
            let q = inverse_normal_cdf(i as f64 / n as f64).unwrap();
            assert!(q > prev);
            prev = q;
        }
    }

    #[test]
    fn deep_tails_are_finite() {
        let lo = inverse_normal_cdf(f64::MIN_POSITIVE).unwrap();
        assert!(lo.is_finite() && lo < -37.0);
        assert!(inverse_normal_cdf(1e-300).unwrap() < -37.0);
    }
}
