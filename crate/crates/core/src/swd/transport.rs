use rayon::prelude::*;

use super::PointCloud;
use crate::ensembles::Ensemble;
use crate::matrix::{dot, norm, Matrix};
use crate::{Error, Result};

const UNIT_TOL: f64 = 1e-8;

/// Projections `uᵀx_m` of every cloud point onto a unit direction.
pub fn project_cloud(cloud: &PointCloud, u: &[f64]) -> Result<Vec<f64>> {
    if u.len() != cloud.dim() {
        return Err(Error::Arity(format!("direction of length {} for a {}-dimensional cloud", u.len(), cloud.dim())));
    }
    if (norm(u) - 1.0).abs() > UNIT_TOL {
        return Err(Error::Precondition(format!("direction norm {} is not 1", norm(u))));
    }
    Ok(project_unchecked(cloud.points(), u))
}

fn project_unchecked(points: &Matrix, u: &[f64]) -> Vec<f64> {
    points.rows_iter().map(|x| dot(x, u)).collect()
}

/// `mean_m |x_(m) - y_(m)|^p` of sorted inputs.
fn sorted_cost(xs: &[f64], ys: &[f64], p: f64) -> f64 {
    let total: f64 = if p == 2.0 {
        xs.iter().zip(ys).map(|(a, b)| (a - b) * (a - b)).sum()
    } else {
        xs.iter().zip(ys).map(|(a, b)| (a - b).abs().powf(p)).sum()
    };
    total / xs.len() as f64
}

fn check_p(p: f64) -> Result<()> {
    if p >= 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("transport exponent p must be >= 1, got {p}")))
    }
}

/// The p-Wasserstein distance between two equal-size empirical measures on the line.
pub fn wasserstein_1d(xs: &[f64], ys: &[f64], p: f64) -> Result<f64> {
    check_p(p)?;
    if xs.len() != ys.len() || xs.is_empty() {
        return Err(Error::Arity(format!("samples of sizes {} and {}", xs.len(), ys.len())));
    }
    let mut a = xs.to_vec();
    let mut b = ys.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    Ok(sorted_cost(&a, &b, p).powf(1.0 / p))
}

fn check_clouds(a: &PointCloud, b: &PointCloud) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::Arity(format!("clouds of sizes {} and {}; equal sizes are required", a.len(), b.len())));
    }
    if a.dim() != b.dim() {
        return Err(Error::Arity(format!("clouds of dimensions {} and {}", a.dim(), b.dim())));
    }
    Ok(())
}

/// Per-direction `W_p^p` values, in row order.
pub fn projected_costs(a: &PointCloud, b: &PointCloud, directions: &Matrix, p: f64) -> Result<Vec<f64>> {
    check_p(p)?;
    check_clouds(a, b)?;
    if directions.nrows() == 0 {
        return Err(Error::Arity("empty direction set".into()));
    }
    if directions.ncols() != a.dim() {
        return Err(Error::Arity(format!("directions of dimension {} for {}-dimensional clouds", directions.ncols(), a.dim())));
    }
    if let Some(i) = directions.rows_iter().position(|u| (norm(u) - 1.0).abs() > UNIT_TOL) {
        return Err(Error::Precondition(format!("direction {i} has norm {}", norm(directions.row(i)))));
    }
    Ok((0..directions.nrows())
        .into_par_iter()
        .map(|i| {
            let u = directions.row(i);
            let mut xs = project_unchecked(a.points(), u);
            let mut ys = project_unchecked(b.points(), u);
            xs.sort_unstable_by(f64::total_cmp);
            ys.sort_unstable_by(f64::total_cmp);
            sorted_cost(&xs, &ys, p)
        })
        .collect())
}

/// `((1/s) Σ_i W_p^p(a·u_i, b·u_i))^{1/p}` over unit direction rows.
pub fn swd_from_directions(a: &PointCloud, b: &PointCloud, directions: &Matrix, p: f64) -> Result<f64> {
    let costs = projected_costs(a, b, directions, p)?;
    Ok((costs.iter().sum::<f64>() / costs.len() as f64).powf(1.0 / p))
}

/// Sliced Wasserstein estimate with the rows of `directions` as slices.
pub fn swd_estimate(a: &PointCloud, b: &PointCloud, directions: &Ensemble, p: f64) -> Result<f64> {
    swd_from_directions(a, b, directions.rows(), p)
}
