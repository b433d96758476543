//! Benchmark result tables shared by the kernel and SWD harnesses.

use std::fmt::Write as _;

use serde::Serialize;

use crate::ensembles::Method;
use crate::stats::{self, Interval};

/// One (method, multiplier) cell of a benchmark.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MseCell {
    /// Kernel or distribution name.
    pub label: String,
    pub method: Method,
    pub multiplier: usize,
    pub s: usize,
    pub trials: usize,
    /// Mean signed error.
    pub mean_err: f64,
    pub mse: f64,
    /// Half-width of the 95% percentile-bootstrap interval of `mse`.
    pub ci95: f64,
    /// Standard deviation of the per-trial squared errors.
    pub std: f64,
}

impl MseCell {
    /// Summarizes per-trial squared and signed errors.
    pub fn from_trials(
        label: &str,
        method: Method,
        multiplier: usize,
        s: usize,
        sq_errors: &[f64],
        errors: &[f64],
        bootstrap_seed: u64,
    ) -> Self {
        let ci = stats::bootstrap_mean(sq_errors, stats::BOOTSTRAP_RESAMPLES, 0.95, bootstrap_seed);
        MseCell {
            label: label.to_string(),
            method,
            multiplier,
            s,
            trials: sq_errors.len(),
            mean_err: stats::mean(errors),
            mse: stats::mean(sq_errors),
            ci95: ci.half_width(),
            std: stats::std_dev(sq_errors),
        }
    }

    pub fn interval(&self) -> Interval {
        Interval { lo: self.mse - self.ci95, hi: self.mse + self.ci95 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MseTable {
    /// Header of the first CSV column: `kernel` or `distribution`.
    pub label_column: &'static str,
    /// Rows in (label, method, multiplier) order.
    pub cells: Vec<MseCell>,
}

impl MseTable {
    pub fn to_csv(&self) -> String {
        let mut out = format!("{},method,multiplier,s,trials,mean_err,mse,ci95\n", self.label_column);
        for c in &self.cells {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                c.label, c.method, c.multiplier, c.s, c.trials, c.mean_err, c.mse, c.ci95
            );
        }
        out
    }

    pub fn cell(&self, method: Method, multiplier: usize) -> Option<&MseCell> {
        self.cells.iter().find(|c| c.method == method && c.multiplier == multiplier)
    }

    /// Methods in first-appearance order.
    pub fn methods(&self) -> Vec<Method> {
        let mut out = Vec::new();
        for c in &self.cells {
            if !out.contains(&c.method) {
                out.push(c.method);
            }
        }
        out
    }
}
