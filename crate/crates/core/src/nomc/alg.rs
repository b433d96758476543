//! Near-orthogonal ensembles from additive characters of polynomials over
//! a prime field.
//!
//! Each coefficient tuple `(c_1, …, c_r)` defines
//! `g(x) = p^{-1/2} exp(2πi (c_r x^r + … + c_1 x) / p)` on `F_p`, embedded in
//! `R^{2p}` as `(Re g(0), Im g(0), …, Re g(p-1), Im g(p-1))`. Weil's bound on
//! character sums caps the coherence of the full family at `(r-1)/√p`.

use rand::Rng as _;

use crate::ensembles::{random_rotation, Ensemble, IsotropicLaw, Method};
use crate::matrix::Matrix;
use crate::seed::{derive_seed, rng, streams};
use crate::{Error, Result};

/// Largest coefficient family enumerated in memory.
pub const MAX_FAMILY: u64 = 1 << 26;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AlgNomcSpec {
    p: u64,
    r: u32,
    selected_count: Option<usize>,
}

impl AlgNomcSpec {
    pub fn new(p: u64, r: u32, selected_count: Option<usize>) -> Result<Self> {
        if p < 3 || !is_prime(p) {
            return Err(Error::Parameter(format!("p must be an odd prime, got {p}")));
        }
        if r < 2 {
            return Err(Error::Parameter(format!("polynomial degree r must be at least 2, got {r}")));
        }
        let family = p
            .checked_pow(r)
            .filter(|&n| n <= MAX_FAMILY)
            .ok_or_else(|| Error::Capacity(format!("p^r = {p}^{r} exceeds {MAX_FAMILY} vectors")))?;
        if let Some(k) = selected_count {
            if k == 0 || k as u64 > family {
                return Err(Error::Parameter(format!("selected_count must be in 1..={family}, got {k}")));
            }
        }
        Ok(AlgNomcSpec { p, r, selected_count })
    }

    /// Spec for a requested ensemble dimension, which must equal `2p`.
    pub fn for_dimension(d: usize, r: u32, selected_count: Option<usize>) -> Result<Self> {
        if d.is_multiple_of(2) && is_prime(d as u64 / 2) && d >= 6 {
            return Self::new(d as u64 / 2, r, selected_count);
        }
        let below = (3..=(d as u64 / 2)).rev().find(|&q| is_prime(q));
        let above = ((d as u64 / 2).max(2) + 1..).find(|&q| is_prime(q)).unwrap_or(3);
        let hint = match below {
            Some(b) => format!("d = {} (p = {b}) or d = {} (p = {above})", 2 * b, 2 * above),
            None => format!("d = {} (p = {above})", 2 * above),
        };
        Err(Error::Dimension(format!("alg-nomc needs d = 2p for an odd prime p; d = {d} is not, try {hint}")))
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn dim(&self) -> usize {
        2 * self.p as usize
    }

    /// `p^r`, the size of the full family.
    pub fn family_size(&self) -> u64 {
        self.p.pow(self.r)
    }

    /// Number of rows the built ensemble will have.
    pub fn row_count(&self) -> usize {
        self.selected_count.unwrap_or(self.family_size() as usize)
    }

    /// Guaranteed coherence bound `(r-1)/√p` of the full family.
    pub fn coherence_bound(&self) -> f64 {
        (self.r - 1) as f64 / (self.p as f64).sqrt()
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut k = 2;
    while k * k <= n {
        if n.is_multiple_of(k) {
            return false;
        }
        k += 1;
    }
    true
}

/// The embedded character vector of `(c_1, …, c_r)`; unit norm.
///
/// The phase `c_r x^r + … + c_1 x` is reduced mod `p` in integer arithmetic so
/// only a single rounding happens, inside the trig call.
pub fn poly_character_vector(p: u64, coeffs: &[u64]) -> Result<Vec<f64>> {
    if p < 2 || !is_prime(p) {
        return Err(Error::Parameter(format!("p must be prime, got {p}")));
    }
    if let Some(&c) = coeffs.iter().find(|&&c| c >= p) {
        return Err(Error::Parameter(format!("coefficient {c} is not a residue mod {p}")));
    }
    Ok(character_vector_unchecked(p, coeffs))
}

fn character_vector_unchecked(p: u64, coeffs: &[u64]) -> Vec<f64> {
    let scale = 1.0 / (p as f64).sqrt();
    let mut out = Vec::with_capacity(2 * p as usize);
    for x in 0..p {
        // Horner on c_r x^r + … + c_1 x, all mod p
        let mut e: u128 = 0;
        for &c in coeffs.iter().rev() {
            e = ((e + c as u128) * x as u128) % p as u128;
        }
        let angle = std::f64::consts::TAU * e as f64 / p as f64;
        out.push(scale * angle.cos());
        out.push(scale * angle.sin());
    }
    out
}

/// Coefficients `(c_1, …, c_r)` of family member `index`: base-`p` digits,
/// `c_1` least significant. Index 0 is the all-zero tuple.
fn coefficients(mut index: u64, p: u64, r: u32) -> Vec<u64> {
    (0..r)
        .map(|_| {
            let c = index % p;
            index /= p;
            c
        })
        .collect()
}

/// Family indices chosen for `spec`: all of them in order, or a seeded
/// Fisher–Yates prefix of the non-zero tuples.
fn selected_indices(spec: &AlgNomcSpec, seed: u64) -> Vec<u64> {
    let n = spec.family_size();
    match spec.selected_count {
        None => (0..n).collect(),
        Some(k) if k as u64 == n => (0..n).collect(),
        Some(k) => {
            let mut pool: Vec<u64> = (1..n).collect();
            let mut r = rng(derive_seed(seed, streams::SUBSAMPLE, 0));
            let k = k.min(pool.len());
            for i in 0..k {
                let j = r.random_range(i..pool.len());
                pool.swap(i, j);
            }
            pool.truncate(k);
            pool
        }
    }
}

/// Unrotated character vectors of the selected family members.
pub fn alg_nomc_directions(spec: &AlgNomcSpec, seed: u64) -> Matrix {
    let idx = selected_indices(spec, seed);
    let mut data = Vec::with_capacity(idx.len() * spec.dim());
    for i in idx {
        data.extend(character_vector_unchecked(spec.p, &coefficients(i, spec.p, spec.r)));
    }
    Matrix::from_vec(data.len() / spec.dim(), spec.dim(), data)
}

/// Character family for `spec`, randomly rotated, on the unit sphere of `R^{2p}`.
pub fn alg_nomc_build(spec: &AlgNomcSpec, seed: u64) -> Result<Ensemble> {
    let rows = alg_nomc_directions(spec, seed);
    let rotation = random_rotation(spec.dim(), derive_seed(seed, streams::ROTATION, 0));
    Ensemble::new(rows, Method::AlgNomc, IsotropicLaw::sphere(spec.dim()), seed, None).map(|e| e.rotated(&rotation))
}

/// Largest odd prime `p` with `2p <= d`, if any.
pub fn embedding_prime(d: usize) -> Option<u64> {
    (3..=(d as u64 / 2)).rev().find(|&q| is_prime(q))
}

/// Character ensemble of `s` unit directions in an arbitrary dimension `d`.
///
/// Uses the largest odd prime `p` with `2p ≤ d` and pads the remaining
/// `d - 2p` coordinates with zeros before a Haar rotation of `R^d`. The degree
/// `r` is the smallest value in `2..p` whose non-zero family covers `s`; when
/// even `r = p - 1` does not, independently rotated blocks of the non-zero
/// family are stacked (the last one subsampled), as block-orthogonal
/// ensembles do with orthogonal blocks.
pub fn alg_nomc_embedded(d: usize, s: usize, seed: u64) -> Result<Matrix> {
    let p = embedding_prime(d)
        .ok_or_else(|| Error::Dimension(format!("alg-nomc needs d >= 6 to embed a character family, got {d}")))?;
    if s == 0 {
        return Err(Error::Arity("ensemble needs at least one sample".into()));
    }
    // degree >= p repeats functions (x^p = x on F_p)
    let max_r = (p - 1).max(2) as u32;
    let mut r = 2;
    while r < max_r && p.pow(r) - 1 < s as u64 && p.checked_pow(r + 1).is_some_and(|n| n <= MAX_FAMILY) {
        r += 1;
    }
    let block = (p.pow(r) - 1) as usize;
    let mut rows = Matrix::zeros(0, d);
    let mut remaining = s;
    let mut b = 0u64;
    while remaining > 0 {
        let take = remaining.min(block);
        let block_seed = derive_seed(seed, streams::BOMC_BLOCK, b);
        let spec = AlgNomcSpec::new(p, r, Some(take))?;
        let dirs = alg_nomc_directions(&spec, block_seed);
        let mut padded = Matrix::zeros(take, d);
        for i in 0..take {
            padded.row_mut(i)[..2 * p as usize].copy_from_slice(dirs.row(i));
        }
        let rotation = random_rotation(d, derive_seed(block_seed, streams::ROTATION, 0));
        rows = rows.vstack(&crate::ensembles::rotate_rows(&padded, &rotation));
        remaining -= take;
        b += 1;
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{dot, norm};
    use crate::nomc::coherence_of_rows;

    const R3: f64 = 1.732_050_807_568_877_2;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn zero_polynomial_is_constant() {
        let v = poly_character_vector(3, &[0, 0]).unwrap();
        let c = 1.0 / R3;
        assert!(close(&v, &[c, 0.0, c, 0.0, c, 0.0], 1e-15));
    }

    #[test]
    fn linear_polynomial_gives_cube_roots_of_unity() {
        let v = poly_character_vector(3, &[1, 0]).unwrap();
        let expected: Vec<f64> = [1.0, 0.0, -0.5, R3 / 2.0, -0.5, -R3 / 2.0].iter().map(|x| x / R3).collect();
        assert!(close(&v, &expected, 1e-12));
        let zero = poly_character_vector(3, &[0, 0]).unwrap();
        assert!(dot(&v, &zero).abs() <= 1e-12);
        assert!((norm(&v) - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn rejects_composite_and_non_residues() {
        assert!(poly_character_vector(9, &[1]).is_err());
        assert!(poly_character_vector(5, &[5]).is_err());
        assert!(AlgNomcSpec::new(2, 2, None).is_err());
        assert!(AlgNomcSpec::new(7, 1, None).is_err());
        assert!(AlgNomcSpec::new(3, 2, Some(10)).is_err());
    }

    #[test]
    fn dimension_guidance() {
        assert_eq!(AlgNomcSpec::for_dimension(14, 2, None).unwrap().p(), 7);
        match AlgNomcSpec::for_dimension(16, 2, None) {
            Err(Error::Dimension(msg)) => assert!(msg.contains("p = 7") && msg.contains("p = 11"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn full_family_p3_r2() {
        let spec = AlgNomcSpec::new(3, 2, None).unwrap();
        let e = alg_nomc_build(&spec, 1).unwrap();
        assert_eq!((e.s(), e.d()), (9, 6));
        assert!(e.rows().rows_iter().all(|r| (norm(r) - 1.0).abs() <= 1e-12));
        assert!(coherence_of_rows(e.rows()) <= 1.0 / R3 + 1e-9);
    }

    #[test]
    fn brute_force_coherence_p7() {
        // all-pairs Gram matrix of the unrotated family
        let spec = AlgNomcSpec::new(7, 2, None).unwrap();
        let rows = alg_nomc_directions(&spec, 0);
        let mut worst = 0.0f64;
        for i in 0..rows.nrows() {
            for j in 0..rows.nrows() {
                if i != j {
                    worst = worst.max(dot(rows.row(i), rows.row(j)).abs());
                }
            }
        }
        assert!(worst <= 1.0 / 7f64.sqrt() + 1e-12, "{worst}");
    }

    #[test]
    fn subsample_skips_zero_tuple_and_is_seeded() {
        let spec = AlgNomcSpec::new(5, 2, Some(7)).unwrap();
        let a = selected_indices(&spec, 3);
        assert_eq!(a.len(), 7);
        assert!(!a.contains(&0));
        assert_eq!(a, selected_indices(&spec, 3));
        let mut sorted = a.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 7);
    }

    #[test]
    fn embedded_family_in_dimension_eight() {
        assert_eq!(embedding_prime(8), Some(3));
        assert_eq!(embedding_prime(5), None);
        let rows = alg_nomc_embedded(8, 8, 4).unwrap();
        assert_eq!((rows.nrows(), rows.ncols()), (8, 8));
        assert!(rows.rows_iter().all(|r| (norm(r) - 1.0).abs() <= 1e-12));
        assert!(coherence_of_rows(&rows) <= 1.0 / R3 + 1e-9);
        let many = alg_nomc_embedded(8, 20, 4).unwrap();
        assert_eq!(many.nrows(), 20);
    }
}
