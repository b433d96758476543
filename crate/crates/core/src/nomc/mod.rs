//! Near-orthogonal ensembles for `s > d`: particle repulsion ([`opt_nomc_build`])
//! and the finite-field character family ([`alg_nomc_build`]), with a
//! coherence measure and a plain-text file format for built ensembles.

mod alg;
mod io;
mod opt;

use rayon::prelude::*;

use crate::ensembles::Ensemble;
use crate::matrix::{dot, norm, Matrix};
use crate::{Error, Result};

pub use alg::{
    alg_nomc_build, alg_nomc_directions, alg_nomc_embedded, embedding_prime, is_prime, poly_character_vector,
    AlgNomcSpec, MAX_FAMILY,
};
pub use io::{load_ensemble, read_ensemble, save_ensemble, write_ensemble};
pub use opt::{
    energy_gradient, opt_nomc_build, pair_energy, total_energy, EarlyStop, OptNomcConfig, OptNomcTrace, TracePoint,
};

/// Coherence `max_{i≠j} |⟨ω_i, ω_j⟩| / (‖ω_i‖‖ω_j‖)` of an ensemble.
pub fn coherence(e: &Ensemble) -> Result<f64> {
    if e.s() < 2 {
        return Err(Error::Arity(format!("coherence needs at least two rows, got {}", e.s())));
    }
    if e.rows().rows_iter().any(|r| norm(r) == 0.0) {
        return Err(Error::Domain("coherence is undefined for zero rows".into()));
    }
    Ok(coherence_of_rows(e.rows()))
}

/// Coherence of raw rows; assumes at least two non-zero rows.
pub fn coherence_of_rows(rows: &Matrix) -> f64 {
    let mut unit = rows.clone();
    for i in 0..unit.nrows() {
        let n = norm(unit.row(i));
        unit.row_mut(i).iter_mut().for_each(|x| *x /= n);
    }
    // max is exact, so the reduction order does not matter
    (1..unit.nrows())
        .into_par_iter()
        .map(|i| {
            let a = unit.row(i);
            (0..i).map(|j| dot(a, unit.row(j)).abs()).fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max)
        .min(1.0)
}
