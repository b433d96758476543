use std::path::Path;

use rand::seq::index;
use rayon::prelude::*;

use crate::ensembles::IsotropicLaw;
use crate::matrix::{sq_dist, Matrix};
use crate::seed::{derive_seed, rng, streams};
use crate::{Error, Result};

/// Rank of the neighbour used by the scaling rule.
pub const NN_RANK: usize = 50;
pub const DEFAULT_SCALE_SAMPLE: usize = 1000;

/// A point set, divided by `scale` at load time.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    points: Matrix,
    scale: f64,
}

impl Dataset {
    /// Wraps raw points and divides them by the fiftieth-neighbour scale.
    pub fn scaled(raw: Matrix, sample_size: usize, seed: u64) -> Result<Self> {
        let scale = fiftieth_nn_scale(&raw, sample_size, seed)?;
        if !(scale > 0.0) {
            return Err(Error::Domain(format!("fiftieth-neighbour scale is {scale}; too many duplicate points")));
        }
        let points = Matrix::from_vec(raw.nrows(), raw.ncols(), raw.into_vec().into_iter().map(|v| v / scale).collect());
        Ok(Dataset { points, scale })
    }

    /// Loads a headerless numeric CSV file and applies the scaling rule.
    pub fn load(path: &Path, sample_size: usize, seed: u64) -> Result<Self> {
        Self::scaled(load_csv_matrix(path)?, sample_size, seed)
    }

    pub fn points(&self) -> &Matrix {
        &self.points
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }
}

/// Reads a headerless CSV of decimals into a matrix.
pub fn load_csv_matrix(path: &Path) -> Result<Matrix> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(file);
    let mut data = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (i, record) in reader.records().enumerate() {
        let line = i + 1;
        let record = record.map_err(|e| Error::Parse { path: path.into(), line, msg: e.to_string() })?;
        if *cols.get_or_insert(record.len()) != record.len() {
            return Err(Error::Parse {
                path: path.into(),
                line,
                msg: format!("expected {} columns, found {}", cols.unwrap_or(0), record.len()),
            });
        }
        for (j, cell) in record.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                path: path.into(),
                line,
                msg: format!("column {}: not a number: {cell:?}", j + 1),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse { path: path.into(), line, msg: format!("column {}: non-finite value", j + 1) });
            }
            data.push(v);
        }
        rows += 1;
    }
    if rows < 2 {
        return Err(Error::InsufficientData { needed: 2, got: rows });
    }
    Ok(Matrix::from_vec(rows, cols.unwrap_or(0), data))
}

/// Mean distance to the fiftieth nearest neighbour (self excluded) over a
/// seeded sample of query points.
pub fn fiftieth_nn_scale(points: &Matrix, sample_size: usize, seed: u64) -> Result<f64> {
    let n = points.nrows();
    if n < NN_RANK + 1 {
        return Err(Error::InsufficientData { needed: NN_RANK + 1, got: n });
    }
    let queries: Vec<usize> = if sample_size >= n {
        (0..n).collect()
    } else {
        let mut r = rng(derive_seed(seed, streams::SUBSAMPLE, 0));
        let mut q = index::sample(&mut r, n, sample_size.max(1)).into_vec();
        q.sort_unstable();
        q
    };
    let dists: Vec<f64> = queries
        .par_iter()
        .map(|&q| {
            let mut d: Vec<f64> = (0..n).filter(|&j| j != q).map(|j| sq_dist(points.row(q), points.row(j))).collect();
            let (_, kth, _) = d.select_nth_unstable_by(NN_RANK - 1, f64::total_cmp);
            kth.sqrt()
        })
        .collect();
    Ok(dists.iter().sum::<f64>() / dists.len() as f64)
}

/// Draws `count` pairs of distinct dataset rows.
pub fn sample_pairs(points: &Matrix, count: usize, seed: u64) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
    let n = points.nrows();
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, got: n });
    }
    let mut r = rng(derive_seed(seed, streams::PAIRS, 0));
    Ok((0..count)
        .map(|_| {
            let ij = index::sample(&mut r, n, 2);
            (points.row(ij.index(0)).to_vec(), points.row(ij.index(1)).to_vec())
        })
        .collect())
}

/// Pairs of independent `N(0, scale² I)` points.
pub fn synthetic_pairs(d: usize, count: usize, scale: f64, seed: u64) -> Vec<(Vec<f64>, Vec<f64>)> {
    let law = IsotropicLaw::gaussian(d);
    let mut r = rng(derive_seed(seed, streams::PAIRS, 1));
    (0..count)
        .map(|_| {
            let x = law.sample(&mut r).into_iter().map(|v| v * scale).collect();
            let y = law.sample(&mut r).into_iter().map(|v| v * scale).collect();
            (x, y)
        })
        .collect()
}
