use rayon::prelude::*;
use serde_json::json;

use super::{check_trials, check_unit, Comparison, DiagnosticReport, Estimate, Relation};
use crate::ensembles::{sample_omc_block, IsotropicLaw};
use crate::matrix::dot;
use crate::seed::derive_seed;
use crate::stats;
use crate::{Error, Result};

const MIN_TRIALS: usize = 10_000;

#[derive(Clone)]
struct Counts {
    joint_le: Vec<u64>,
    joint_ge: Vec<u64>,
    marg_le: Vec<Vec<u64>>,
    marg_ge: Vec<Vec<u64>>,
}

impl Counts {
    fn zero(levels: usize, d: usize) -> Self {
        Counts {
            joint_le: vec![0; levels],
            joint_ge: vec![0; levels],
            marg_le: vec![vec![0; d]; levels],
            marg_ge: vec![vec![0; d]; levels],
        }
    }

    fn add(mut self, other: Counts) -> Counts {
        for (a, b) in self.joint_le.iter_mut().zip(other.joint_le) {
            *a += b;
        }
        for (a, b) in self.joint_ge.iter_mut().zip(other.joint_ge) {
            *a += b;
        }
        for (ra, rb) in self.marg_le.iter_mut().zip(other.marg_le) {
            ra.iter_mut().zip(rb).for_each(|(a, b)| *a += b);
        }
        for (ra, rb) in self.marg_ge.iter_mut().zip(other.marg_ge) {
            ra.iter_mut().zip(rb).for_each(|(a, b)| *a += b);
        }
        self
    }
}

fn product(counts: &[u64], n: u64) -> Estimate {
    let mut value = 1.0;
    let mut lo = 1.0;
    let mut hi = 1.0;
    for &c in counts {
        let ci = stats::wilson(c, n, stats::Z99);
        value *= c as f64 / n as f64;
        lo *= ci.lo;
        hi *= ci.hi;
    }
    Estimate { value, lo, hi }
}

fn proportion(c: u64, n: u64) -> Estimate {
    Estimate::new(c as f64 / n as f64, stats::wilson(c, n, stats::Z99))
}

/// Negative dependence of `X_i = |ω_iᵀz|` for an orthogonal sphere ensemble.
///
/// For every level `x` in `thresholds` both orthant inequalities
/// `P(∩ X_i ≤ x) ≤ Π P(X_i ≤ x)` and `P(∩ X_i ≥ x) ≤ Π P(X_i ≥ x)` are
/// estimated. Product intervals multiply the per-coordinate Wilson bounds.
pub fn nd_empirical_test(d: usize, z: &[f64], thresholds: &[f64], trials: usize, seed: u64) -> Result<DiagnosticReport> {
    if d < 2 {
        return Err(Error::Parameter(format!("negative dependence needs d >= 2, got {d}")));
    }
    if z.len() != d {
        return Err(Error::Arity(format!("z has length {}, expected {d}", z.len())));
    }
    check_unit(z)?;
    check_trials(trials, MIN_TRIALS)?;
    if thresholds.is_empty() || thresholds.iter().any(|t| !t.is_finite()) {
        return Err(Error::Parameter("thresholds must be a non-empty list of finite values".into()));
    }
    let law = IsotropicLaw::sphere(d);
    let levels = thresholds.len();
    let counts = (0..trials as u64)
        .into_par_iter()
        .map(|t| -> Result<Counts> {
            let e = sample_omc_block(&law, d, derive_seed(seed, 0, t))?;
            let xs: Vec<f64> = e.rows().rows_iter().map(|w| dot(w, z).abs()).collect();
            let mut c = Counts::zero(levels, d);
            for (k, &x) in thresholds.iter().enumerate() {
                let mut all_le = true;
                let mut all_ge = true;
                for (i, &v) in xs.iter().enumerate() {
                    let le = v <= x;
                    let ge = v >= x;
                    c.marg_le[k][i] += u64::from(le);
                    c.marg_ge[k][i] += u64::from(ge);
                    all_le &= le;
                    all_ge &= ge;
                }
                c.joint_le[k] += u64::from(all_le);
                c.joint_ge[k] += u64::from(all_ge);
            }
            Ok(c)
        })
        .try_reduce(|| Counts::zero(levels, d), |a, b| Ok(a.add(b)))?;

    let n = trials as u64;
    let mut comparisons = Vec::new();
    for (k, x) in thresholds.iter().enumerate() {
        comparisons.push(Comparison::new(
            format!("P(all <= {x}) <= product"),
            proportion(counts.joint_le[k], n),
            Relation::Le,
            product(&counts.marg_le[k], n),
        ));
        comparisons.push(Comparison::new(
            format!("P(all >= {x}) <= product"),
            proportion(counts.joint_ge[k], n),
            Relation::Le,
            product(&counts.marg_ge[k], n),
        ));
    }
    let config = json!({ "d": d, "z": z, "thresholds": thresholds, "trials": trials, "seed": seed });
    Ok(DiagnosticReport::new("nd", config, comparisons, true))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::Verdict;

    #[test]
    fn two_dimensional_arc_lengths() {
        let r = nd_empirical_test(2, &[1.0, 0.0], &[0.5], 20_000, 1).unwrap();
        let lower = &r.comparisons[0];
        assert_eq!(lower.lhs.value, 0.0);
        // P(|cos θ| <= 1/2) = 1/3
        assert!((lower.rhs.value - 1.0 / 9.0).abs() < 0.01);
        assert_eq!(r.verdict, Verdict::Consistent);
    }

    #[test]
    fn certain_event() {
        let r = nd_empirical_test(3, &[0.0, 1.0, 0.0], &[1.0, 2.0], 10_000, 2).unwrap();
        for c in r.comparisons.iter().step_by(2) {
            assert_eq!(c.lhs.value, 1.0);
            assert_eq!(c.rhs.value, 1.0);
        }
    }

    #[test]
    fn three_dimensional_grid() {
        let z = [0.6, 0.0, 0.8];
        let r = nd_empirical_test(3, &z, &[0.2, 0.4, 0.6, 0.8, 0.95], 20_000, 3).unwrap();
        assert_eq!(r.verdict, Verdict::Consistent);
        assert!(r.comparisons.iter().all(|c| (0.0..=1.0).contains(&c.lhs.value) && c.lhs.lo <= c.lhs.hi));
        assert_eq!(r, nd_empirical_test(3, &z, &[0.2, 0.4, 0.6, 0.8, 0.95], 20_000, 3).unwrap());
    }

    #[test]
    fn preconditions() {
        assert!(nd_empirical_test(3, &[1.0, 1.0, 0.0], &[0.5], 10_000, 1).is_err());
        assert!(nd_empirical_test(3, &[1.0, 0.0, 0.0], &[0.5], 100, 1).is_err());
        assert!(nd_empirical_test(1, &[1.0], &[0.5], 10_000, 1).is_err());
    }
}
