//! Empirical checks of negative dependence, MGF dominance, MSE ordering,
//! tail behaviour and uniform convergence for orthogonal ensembles.
//!
//! Probabilities carry Wilson intervals and moments carry percentile
//! bootstrap intervals, both at 99%. A weak claim `a ≤ b` is violated only
//! when `a`'s interval lies entirely above `b`'s; a strict claim `a < b` is
//! established only when the intervals are disjoint and inconclusive when
//! they overlap.

mod concentration;
mod dependence;
mod legendre;
mod sweep;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use concentration::{mgf_dominance_test, mse_ordering_test, tail_comparison};
pub use dependence::nd_empirical_test;
pub use legendre::empirical_legendre;
pub use sweep::{ball_grid, uniform_error_sweep, SweepRow, SweepTable};

use crate::ensembles::{sample_bomc, sample_iid, sample_omc_block, Ensemble, IsotropicLaw};
use crate::matrix::{dot, norm};
use crate::stats::Interval;
use crate::{Error, Result};

/// Confidence level of every verdict.
pub const VERDICT_LEVEL: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Consistent,
    Violated,
    Inconclusive,
}

impl Verdict {
    /// Violated dominates inconclusive, which dominates consistent.
    pub fn combine(verdicts: impl IntoIterator<Item = Verdict>) -> Verdict {
        verdicts.into_iter().fold(Verdict::Consistent, |acc, v| match (acc, v) {
            (Verdict::Violated, _) | (_, Verdict::Violated) => Verdict::Violated,
            (Verdict::Inconclusive, _) | (_, Verdict::Inconclusive) => Verdict::Inconclusive,
            _ => Verdict::Consistent,
        })
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Consistent => "consistent",
            Verdict::Violated => "violated",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// A point estimate with its confidence interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
}

impl Estimate {
    pub fn new(value: f64, ci: Interval) -> Self {
        Estimate { value, lo: ci.lo, hi: ci.hi }
    }

    pub fn exact(value: f64) -> Self {
        Estimate { value, lo: value, hi: value }
    }

    pub fn radius(&self) -> f64 {
        (self.hi - self.value).max(self.value - self.lo)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    /// `lhs ≤ rhs`.
    Le,
    /// `lhs < rhs`.
    Lt,
    /// `rhs.value` lies in `lhs`'s interval.
    Covers,
}

/// One inequality between two estimates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub label: String,
    pub relation: Relation,
    pub lhs: Estimate,
    pub rhs: Estimate,
    pub verdict: Verdict,
}

impl Comparison {
    pub fn new(label: impl Into<String>, lhs: Estimate, relation: Relation, rhs: Estimate) -> Self {
        let verdict = match relation {
            Relation::Le if lhs.lo > rhs.hi => Verdict::Violated,
            Relation::Le => Verdict::Consistent,
            Relation::Lt if lhs.hi < rhs.lo => Verdict::Consistent,
            Relation::Lt if lhs.lo > rhs.hi => Verdict::Violated,
            Relation::Lt => Verdict::Inconclusive,
            Relation::Covers if lhs.lo <= rhs.value && rhs.value <= lhs.hi => Verdict::Consistent,
            Relation::Covers => Verdict::Violated,
        };
        Comparison { label: label.into(), relation, lhs, rhs, verdict }
    }
}

/// Outcome of one diagnostic, serialized as JSON with a fixed key order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticReport {
    pub claim: String,
    pub config: serde_json::Value,
    pub level: f64,
    pub comparisons: Vec<Comparison>,
    pub verdict: Verdict,
    /// False when the verdict is informational only.
    pub binding: bool,
}

impl DiagnosticReport {
    pub(crate) fn new(claim: &str, config: serde_json::Value, comparisons: Vec<Comparison>, binding: bool) -> Self {
        let verdict = Verdict::combine(comparisons.iter().map(|c| c.verdict));
        DiagnosticReport { claim: claim.into(), config, level: VERDICT_LEVEL, comparisons, verdict, binding }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}

/// Test functions `f` of the estimand `F(z) = E f(ωᵀz)`, ω ~ N(0, I).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TestFunction {
    /// `u²`; monotone in `|u|`.
    Square,
    /// `cos u`.
    AbsCos,
    /// `e^{cu}`.
    ExpC(f64),
}

impl TestFunction {
    pub fn eval(&self, u: f64) -> f64 {
        match self {
            TestFunction::Square => u * u,
            TestFunction::AbsCos => u.cos(),
            TestFunction::ExpC(c) => (c * u).exp(),
        }
    }

    /// Function class label.
    pub fn class(&self) -> &'static str {
        match self {
            TestFunction::Square => "F1",
            TestFunction::AbsCos => "F2/F3",
            TestFunction::ExpC(_) => "F3",
        }
    }

    pub fn is_monotone_in_abs(&self) -> bool {
        matches!(self, TestFunction::Square)
    }

    /// `E f(ωᵀz)` for standard Gaussian ω.
    pub fn expectation(&self, z: &[f64]) -> f64 {
        let z2 = dot(z, z);
        match self {
            TestFunction::Square => z2,
            TestFunction::AbsCos => (-0.5 * z2).exp(),
            TestFunction::ExpC(c) => (0.5 * c * c * z2).exp(),
        }
    }

    /// `(1/s) Σ_i f(ω_iᵀz)`.
    pub fn estimate(&self, ensemble: &Ensemble, z: &[f64]) -> f64 {
        let rows = ensemble.rows();
        rows.rows_iter().map(|w| self.eval(dot(w, z))).sum::<f64>() / rows.nrows() as f64
    }
}

impl fmt::Display for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TestFunction::Square => f.write_str("square"),
            TestFunction::AbsCos => f.write_str("cos"),
            TestFunction::ExpC(c) => write!(f, "exp:{c}"),
        }
    }
}

impl FromStr for TestFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "square" => Ok(TestFunction::Square),
            "cos" => Ok(TestFunction::AbsCos),
            _ => match s.strip_prefix("exp:").map(str::parse::<f64>) {
                Some(Ok(c)) if c.is_finite() && c != 0.0 => Ok(TestFunction::ExpC(c)),
                _ => Err(Error::Parameter(format!("unknown test function {s:?}; expected square, cos or exp:<c>"))),
            },
        }
    }
}

impl Serialize for TestFunction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TestFunction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

pub(crate) fn check_unit(z: &[f64]) -> Result<()> {
    if (norm(z) - 1.0).abs() > 1e-8 {
        return Err(Error::Precondition(format!("z must be a unit vector, has norm {}", norm(z))));
    }
    Ok(())
}

pub(crate) fn check_trials(trials: usize, min: usize) -> Result<()> {
    if trials < min {
        return Err(Error::Precondition(format!("need at least {min} trials, got {trials}")));
    }
    Ok(())
}

/// An orthogonal Gaussian ensemble of `s` rows: one block when `s ≤ d`.
pub(crate) fn orthogonal(d: usize, s: usize, seed: u64) -> Result<Ensemble> {
    let law = IsotropicLaw::gaussian(d);
    if s <= d {
        sample_omc_block(&law, s, seed)
    } else {
        sample_bomc(&law, s, seed)
    }
}

pub(crate) fn iid(d: usize, s: usize, seed: u64) -> Result<Ensemble> {
    sample_iid(&IsotropicLaw::gaussian(d), s, seed)
}
