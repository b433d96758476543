use crate::{Error, Result};

/// Largest `θx` for which `e^{θx}` is finite.
const MAX_EXPONENT: f64 = 709.78;

/// `max_θ (θa − log mean e^{θX})` over `thetas`.
///
/// Every θ must point from the sample mean towards `a`. The log-mean is
/// computed with a shifted sum, but a θ at which some `e^{θx}` itself
/// overflows is rejected.
pub fn empirical_legendre(samples: &[f64], a: f64, thetas: &[f64]) -> Result<f64> {
    if samples.is_empty() || thetas.is_empty() {
        return Err(Error::Arity("empirical Legendre transform needs samples and a theta grid".into()));
    }
    let mean = samples.iter().sum::<f64>() / samples.len() as f64;
    if let Some(t) = thetas.iter().find(|t| (a > mean && **t < 0.0) || (a < mean && **t > 0.0) || !t.is_finite()) {
        return Err(Error::Precondition(format!("theta = {t} points away from a = {a} (sample mean {mean})")));
    }
    let mut best = f64::NEG_INFINITY;
    for &theta in thetas {
        let top = samples.iter().map(|x| theta * x).fold(f64::NEG_INFINITY, f64::max);
        if top > MAX_EXPONENT {
            return Err(Error::GridRange { theta });
        }
        let sum: f64 = samples.iter().map(|x| (theta * x - top).exp()).sum();
        let log_mgf = top + (sum / samples.len() as f64).ln();
        best = best.max(theta * a - log_mgf);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::IsotropicLaw;
    use crate::seed::rng;

    fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect()
    }

    #[test]
    fn at_the_mean() {
        let xs = [1.0, 2.0, 3.0];
        let v = empirical_legendre(&xs, 2.0, &[1e-6, 1e-4]).unwrap();
        assert!(v.abs() < 1e-6);
    }

    #[test]
    fn gaussian_rate() {
        let law = IsotropicLaw::gaussian(1_000_000);
        let xs = law.sample(&mut rng(3));
        let v = empirical_legendre(&xs, 1.0, &grid(0.0, 2.0, 200)).unwrap();
        assert!((v - 0.5).abs() < 0.02, "{v}");
    }

    #[test]
    fn constant_samples_grow_with_grid() {
        let xs = [1.0; 4];
        let a = empirical_legendre(&xs, 2.0, &grid(0.0, 5.0, 10)).unwrap();
        let b = empirical_legendre(&xs, 2.0, &grid(0.0, 50.0, 100)).unwrap();
        assert!((a - 5.0).abs() < 1e-12 && (b - 50.0).abs() < 1e-12);
    }

    #[test]
    fn refinement_is_monotone() {
        let xs: Vec<f64> = (0..100).map(|k| (k as f64 * 0.37).sin()).collect();
        let coarse = grid(0.0, 3.0, 6);
        let fine = grid(0.0, 3.0, 60);
        assert!(empirical_legendre(&xs, 0.5, &fine).unwrap() >= empirical_legendre(&xs, 0.5, &coarse).unwrap());
    }

    #[test]
    fn errors() {
        assert!(matches!(empirical_legendre(&[1.0, 1000.0], 2000.0, &[1.0]), Err(Error::GridRange { theta }) if theta == 1.0));
        assert!(matches!(empirical_legendre(&[0.0, 1.0], 2.0, &[-1.0]), Err(Error::Precondition(_))));
        assert!(empirical_legendre(&[], 2.0, &[1.0]).is_err());
    }
}
