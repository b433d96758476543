//! Near-orthogonal ensembles by particle repulsion on the unit sphere.

use serde::{Deserialize, Serialize};

use crate::ensembles::{random_rotation, sample_bomc, Ensemble, IsotropicLaw, Method};
use crate::matrix::{norm, sq_dist, Matrix};
use crate::seed::{derive_seed, streams};
use crate::{Error, Result};

/// Stopping rule on the spread `D_max - D_min` of pairwise distances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EarlyStop {
    /// Lag, in iterations, over which the spread change is measured.
    pub window: usize,
    pub tol: f64,
}

impl Default for EarlyStop {
    fn default() -> Self {
        EarlyStop { window: 5000, tol: 0.01 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptNomcConfig {
    /// Energy scale δ.
    pub delta: f64,
    /// Step size η.
    pub eta: f64,
    /// Number of gradient steps T.
    pub iterations: usize,
    /// Disabled by default: `iterations` alone decides when to stop.
    pub early_stop: Option<EarlyStop>,
    pub seed: u64,
}

impl Default for OptNomcConfig {
    fn default() -> Self {
        OptNomcConfig { delta: 0.1, eta: 1.0, iterations: 50_000, early_stop: None, seed: 0 }
    }
}

impl OptNomcConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::Parameter(format!("delta must be positive, got {}", self.delta)));
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::Parameter(format!("eta must be positive, got {}", self.eta)));
        }
        if let Some(es) = self.early_stop {
            if es.window == 0 || !(es.tol >= 0.0) {
                return Err(Error::Parameter("early stop needs a positive window and non-negative tolerance".into()));
            }
        }
        Ok(())
    }
}

/// `δ / (δ + ‖a - b‖²)`.
#[inline]
pub fn pair_energy(a: &[f64], b: &[f64], delta: f64) -> f64 {
    delta / (delta + sq_dist(a, b))
}

/// Sum of [`pair_energy`] over unordered pairs.
pub fn total_energy(particles: &Matrix, delta: f64) -> f64 {
    let mut e = 0.0;
    for i in 0..particles.nrows() {
        for j in 0..i {
            e += pair_energy(particles.row(i), particles.row(j), delta);
        }
    }
    e
}

/// Row `i` is `∂/∂ω_i Σ_{j≠i} E(ω_i, ω_j)`, the ambient (unprojected) gradient.
pub fn energy_gradient(particles: &Matrix, delta: f64) -> Matrix {
    energy_pass(particles, delta).gradient
}

struct Pass {
    gradient: Matrix,
    energy: f64,
    d_max: f64,
    d_min: f64,
}

// One fixed-order sweep over pairs computing everything an iteration needs.
fn energy_pass(particles: &Matrix, delta: f64) -> Pass {
    let (s, d) = (particles.nrows(), particles.ncols());
    let mut gradient = Matrix::zeros(s, d);
    let mut energy = 0.0;
    let mut d_max = 0.0f64;
    let mut d_min = f64::INFINITY;
    let mut diff = vec![0.0; d];
    for i in 0..s {
        for j in 0..i {
            let (a, b) = (particles.row(i), particles.row(j));
            let mut r2 = 0.0;
            for k in 0..d {
                diff[k] = a[k] - b[k];
                r2 += diff[k] * diff[k];
            }
            let denom = delta + r2;
            energy += delta / denom;
            let coef = -2.0 * delta / (denom * denom);
            for k in 0..d {
                gradient[(i, k)] += coef * diff[k];
                gradient[(j, k)] -= coef * diff[k];
            }
            let dist = r2.sqrt();
            d_max = d_max.max(dist);
            d_min = d_min.min(dist);
        }
    }
    if s < 2 {
        d_min = 0.0;
    }
    Pass { gradient, energy, d_max, d_min }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TracePoint {
    pub iteration: usize,
    /// Total energy over unordered pairs.
    pub energy: f64,
    pub d_max: f64,
    pub d_min: f64,
}

/// Per-iteration record of an optimization run. Entry `t` describes the
/// particles after `t` steps.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct OptNomcTrace {
    pub points: Vec<TracePoint>,
    pub stopped_early_at: Option<usize>,
}

impl OptNomcTrace {
    pub fn initial_energy(&self) -> f64 {
        self.points.first().map_or(0.0, |p| p.energy)
    }

    pub fn final_energy(&self) -> f64 {
        self.points.last().map_or(0.0, |p| p.energy)
    }
}

/// Runs plain projected gradient descent `ω_i ← normalize(ω_i − η F_i)` from a
/// block-orthogonal start, then applies a Haar rotation.
///
/// Returns unit-norm rows; rescale with
/// [`radial_renormalize`](crate::ensembles::radial_renormalize) for other laws.
pub fn opt_nomc_build(d: usize, s: usize, cfg: &OptNomcConfig) -> Result<(Ensemble, OptNomcTrace)> {
    cfg.validate()?;
    if d < 2 {
        return Err(Error::Dimension(format!("opt-nomc needs d >= 2, got {d}")));
    }
    if s == 0 {
        return Err(Error::Arity("opt-nomc needs at least one particle".into()));
    }
    let law = IsotropicLaw::sphere(d);
    let mut particles = sample_bomc(&law, s, cfg.seed)?.into_rows();
    let trace = descend(&mut particles, cfg);
    let rotation = random_rotation(d, derive_seed(cfg.seed, streams::ROTATION, 0));
    let ensemble = Ensemble::new(particles, Method::OptNomc, law, cfg.seed, None)?.rotated(&rotation);
    Ok((ensemble, trace))
}

fn descend(particles: &mut Matrix, cfg: &OptNomcConfig) -> OptNomcTrace {
    let mut trace = OptNomcTrace::default();
    let mut spreads = Vec::with_capacity(cfg.iterations + 1);
    for t in 0..=cfg.iterations {
        let pass = energy_pass(particles, cfg.delta);
        trace.points.push(TracePoint { iteration: t, energy: pass.energy, d_max: pass.d_max, d_min: pass.d_min });
        spreads.push(pass.d_max - pass.d_min);
        if let Some(es) = cfg.early_stop {
            if t >= es.window && (spreads[t] - spreads[t - es.window]).abs() < es.tol {
                trace.stopped_early_at = Some(t);
                break;
            }
        }
        if t == cfg.iterations {
            break;
        }
        for i in 0..particles.nrows() {
            let row = particles.row_mut(i);
            for (x, g) in row.iter_mut().zip(pass.gradient.row(i)) {
                *x -= cfg.eta * g;
            }
            let n = norm(row);
            row.iter_mut().for_each(|x| *x /= n);
            debug_assert!((norm(row) - 1.0).abs() <= 1e-12);
        }
    }
    trace
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::sample_iid;

    #[test]
    fn pair_energy_values() {
        let a = [0.3, -0.2];
        assert_eq!(pair_energy(&a, &a, 0.1), 1.0);
        // ‖a-b‖² = δ gives one half
        assert!((pair_energy(&[0.0, 0.0], &[0.5, 0.0], 0.25) - 0.5).abs() < 1e-15);
        // δ = 0.1, ‖a-b‖² = 0.9 gives 0.1 / 1.0
        assert!((pair_energy(&[0.0, 0.0], &[0.9f64.sqrt(), 0.0], 0.1) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn single_particle_has_no_gradient() {
        let p = Matrix::from_rows(&[[1.0, 0.0, 0.0]]);
        assert_eq!(energy_gradient(&p, 0.1), Matrix::zeros(1, 3));
    }

    #[test]
    fn antipodal_pair_gradient() {
        let delta = 0.1;
        let p = Matrix::from_rows(&[[1.0, 0.0], [-1.0, 0.0]]);
        let g = energy_gradient(&p, delta);
        // pointing from particle 1 toward particle 2, magnitude 4δ/(δ+4)²
        let expected = 4.0 * delta / (delta + 4.0f64).powi(2);
        assert!((g[(0, 0)] + expected).abs() < 1e-15);
        assert_eq!(g[(0, 1)], 0.0);
        assert!((g[(1, 0)] - expected).abs() < 1e-15);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let delta = 0.1;
        let p = sample_iid(&IsotropicLaw::sphere(3), 5, 21).unwrap().into_rows();
        let g = energy_gradient(&p, delta);
        let h = 1e-6;
        for i in 0..5 {
            // partial energy of particle i only
            let f = |m: &Matrix| (0..5).filter(|&j| j != i).map(|j| pair_energy(m.row(i), m.row(j), delta)).sum::<f64>();
            for k in 0..3 {
                let (mut plus, mut minus) = (p.clone(), p.clone());
                plus[(i, k)] += h;
                minus[(i, k)] -= h;
                let fd = (f(&plus) - f(&minus)) / (2.0 * h);
                let rel = (fd - g[(i, k)]).abs() / g[(i, k)].abs().max(1e-3);
                assert!(rel <= 1e-5, "i={i} k={k} fd={fd} g={}", g[(i, k)]);
            }
        }
    }

    #[test]
    fn zero_iterations_returns_rotated_initialization() {
        let cfg = OptNomcConfig { iterations: 0, seed: 4, ..Default::default() };
        let (e, trace) = opt_nomc_build(3, 6, &cfg).unwrap();
        assert_eq!(trace.points.len(), 1);
        let init = sample_bomc(&IsotropicLaw::sphere(3), 6, 4).unwrap().into_rows();
        assert!(e.rows().gram().max_abs_diff(&init.gram()) < 1e-12);
    }

    #[test]
    fn energy_descends_on_small_instance() {
        let cfg = OptNomcConfig { iterations: 5000, seed: 1, ..Default::default() };
        let (e, trace) = opt_nomc_build(3, 15, &cfg).unwrap();
        assert!(trace.final_energy() <= trace.initial_energy());
        assert!(e.rows().rows_iter().all(|r| (norm(r) - 1.0).abs() <= 1e-12));
        assert_eq!(e.method(), Method::OptNomc);
    }

    #[test]
    fn early_stop_fires_on_converged_run() {
        let cfg = OptNomcConfig {
            iterations: 20_000,
            early_stop: Some(EarlyStop { window: 500, tol: 0.01 }),
            seed: 2,
            ..Default::default()
        };
        let (_, trace) = opt_nomc_build(3, 10, &cfg).unwrap();
        let at = trace.stopped_early_at.expect("should stop early");
        assert!((500..20_000).contains(&at));
        assert_eq!(trace.points.len(), at + 1);
    }

    #[test]
    fn rejects_bad_config() {
        let bad = OptNomcConfig { delta: 0.0, ..Default::default() };
        assert!(opt_nomc_build(3, 4, &bad).is_err());
        assert!(matches!(opt_nomc_build(1, 4, &OptNomcConfig::default()), Err(Error::Dimension(_))));
    }
}
