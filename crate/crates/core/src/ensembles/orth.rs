//! Exactly orthogonal ensembles and Haar rotations.

use crate::ensembles::law::gaussian_vec;
use crate::ensembles::{Ensemble, IsotropicLaw, Method};
use crate::matrix::{dot, norm, Matrix};
use crate::seed::{derive_seed, rng, streams, Rng};
use crate::{Error, Result};

/// Residuals below this fraction of the input row norm count as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-10;

/// Orthonormalizes the rows of `rows` in order.
///
/// Modified Gram–Schmidt with a second reorthogonalization pass, which keeps
/// pairwise dot products at the level of machine precision. Returns
/// [`Error::Degenerate`] if some row is (numerically) in the span of the
/// preceding ones.
pub fn gram_schmidt(rows: &Matrix) -> Result<Matrix> {
    let (k, d) = (rows.nrows(), rows.ncols());
    if k > d {
        return Err(Error::Dimension(format!("cannot orthogonalize {k} rows in dimension {d}")));
    }
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(k);
    for (i, row) in rows.rows_iter().enumerate() {
        let original = norm(row);
        let mut v = row.to_vec();
        for _pass in 0..2 {
            for qj in &q {
                let c = dot(&v, qj);
                v.iter_mut().zip(qj).for_each(|(x, y)| *x -= c * y);
            }
        }
        let residual = norm(&v);
        if original == 0.0 || !(residual > DEGENERACY_TOL * original) {
            return Err(Error::Degenerate { row: i, residual });
        }
        v.iter_mut().for_each(|x| *x /= residual);
        q.push(v);
    }
    Ok(Matrix::from_vec(k, d, q.concat()))
}

/// Draws `k` orthonormal directions in `R^d`, redrawing the whole Gaussian
/// block on degeneracy. When `law` is not isotropic the raw draws come from
/// the law itself rather than from a Gaussian.
fn orthonormal_block(law: &IsotropicLaw, k: usize, rng: &mut Rng) -> Matrix {
    let d = law.dim();
    loop {
        let rows: Vec<Vec<f64>> = (0..k)
            .map(|_| if law.is_isotropic() { gaussian_vec(rng, d) } else { law.sample(rng) })
            .collect();
        if let Ok(q) = gram_schmidt(&Matrix::from_rows(&rows)) {
            return q;
        }
    }
}

/// One orthogonal block of `s ≤ d` samples whose marginals follow `law`.
pub fn sample_omc_block(law: &IsotropicLaw, s: usize, seed: u64) -> Result<Ensemble> {
    let d = law.dim();
    if s == 0 || s > d {
        return Err(Error::Dimension(format!("an orthogonal block needs 1 <= s <= d = {d}, got s = {s}")));
    }
    let mut r = rng(seed);
    let mut rows = orthonormal_block(law, s, &mut r);
    for i in 0..s {
        let radius = law.sample_radius(&mut r);
        rows.row_mut(i).iter_mut().for_each(|x| *x *= radius);
    }
    Ensemble::new(rows, Method::Omc, *law, seed, Some(d))
}

/// Block-orthogonal ensemble: `⌈s/d⌉` independent orthogonal blocks, the last
/// one holding `s mod d` rows when `d` does not divide `s`.
pub fn sample_bomc(law: &IsotropicLaw, s: usize, seed: u64) -> Result<Ensemble> {
    if s == 0 {
        return Err(Error::Arity("ensemble needs at least one sample".into()));
    }
    let d = law.dim();
    let mut rows = Matrix::zeros(0, d);
    for (b, size) in block_sizes(s, d).into_iter().enumerate() {
        let block = sample_omc_block(law, size, derive_seed(seed, streams::BOMC_BLOCK, b as u64))?;
        rows = rows.vstack(block.rows());
    }
    Ensemble::new(rows, Method::Bomc, *law, seed, Some(d))
}

/// Sizes of the blocks that `sample_bomc` stacks.
pub fn block_sizes(s: usize, d: usize) -> Vec<usize> {
    let mut sizes = vec![d; s / d];
    if !s.is_multiple_of(d) {
        sizes.push(s % d);
    }
    sizes
}

/// Haar-distributed element of `O(d)`: Gram–Schmidt of a Gaussian matrix,
/// which is QR with the diagonal of `R` forced positive.
pub fn random_rotation(d: usize, seed: u64) -> Matrix {
    assert!(d >= 1, "rotation dimension must be positive");
    let mut r = rng(seed);
    orthonormal_block(&IsotropicLaw::gaussian(d), d, &mut r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_offdiag_normalized(rows: &Matrix) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..rows.nrows() {
            for j in 0..i {
                let c = dot(rows.row(i), rows.row(j)) / (norm(rows.row(i)) * norm(rows.row(j)));
                worst = worst.max(c.abs());
            }
        }
        worst
    }

    #[test]
    fn identity_prefix_is_fixed() {
        let m = Matrix::from_rows(&[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]);
        assert_eq!(gram_schmidt(&m).unwrap(), m);
    }

    #[test]
    fn textbook_projection() {
        let m = Matrix::from_rows(&[[1.0, 0.0], [1.0, 1.0]]);
        let q = gram_schmidt(&m).unwrap();
        assert!(q.max_abs_diff(&Matrix::identity(2)) < 1e-15);
    }

    #[test]
    fn random_square_block_has_identity_gram() {
        let mut r = rng(3);
        let g = Matrix::from_rows(&(0..4).map(|_| gaussian_vec(&mut r, 4)).collect::<Vec<_>>());
        let q = gram_schmidt(&g).unwrap();
        // explicit QQᵀ, computed entrywise
        let mut gram = Matrix::zeros(4, 4);
        for i in 0..4 {
            for j in 0..4 {
                gram[(i, j)] = (0..4).map(|k| q[(i, k)] * q[(j, k)]).sum();
            }
        }
        assert!(gram.max_abs_diff(&Matrix::identity(4)) < 1e-10);
    }

    #[test]
    fn degenerate_rows_are_reported() {
        let m = Matrix::from_rows(&[[1.0, 2.0, 3.0], [2.0, 4.0, 6.0]]);
        assert!(matches!(gram_schmidt(&m), Err(Error::Degenerate { row: 1, .. })));
        let z = Matrix::from_rows(&[[0.0, 0.0]]);
        assert!(matches!(gram_schmidt(&z), Err(Error::Degenerate { row: 0, .. })));
        let tall = Matrix::from_rows(&[[1.0], [2.0]]);
        assert!(matches!(gram_schmidt(&tall), Err(Error::Dimension(_))));
    }

    #[test]
    fn omc_block_is_orthogonal() {
        let e = sample_omc_block(&IsotropicLaw::gaussian(3), 3, 5).unwrap();
        assert!(max_offdiag_normalized(e.rows()) <= 1e-8);
        let u = sample_omc_block(&IsotropicLaw::sphere(3), 3, 5).unwrap();
        assert!(u.rows().gram().max_abs_diff(&Matrix::identity(3)) <= 1e-8);
    }

    #[test]
    fn omc_rejects_oversized_block() {
        assert!(matches!(sample_omc_block(&IsotropicLaw::gaussian(3), 4, 0), Err(Error::Dimension(_))));
    }

    #[test]
    fn bomc_block_structure() {
        let law = IsotropicLaw::gaussian(4);
        let e = sample_bomc(&law, 8, 2).unwrap();
        assert_eq!(e.s(), 8);
        let first = Matrix::from_rows(&(0..4).map(|i| e.rows().row(i).to_vec()).collect::<Vec<_>>());
        let second = Matrix::from_rows(&(4..8).map(|i| e.rows().row(i).to_vec()).collect::<Vec<_>>());
        assert!(max_offdiag_normalized(&first) <= 1e-8);
        assert!(max_offdiag_normalized(&second) <= 1e-8);
        assert_eq!(block_sizes(6, 4), vec![4, 2]);
        assert_eq!(block_sizes(8, 4), vec![4, 4]);
    }

    #[test]
    fn single_bomc_block_equals_omc_with_derived_seed() {
        let law = IsotropicLaw::gaussian(5);
        let b = sample_bomc(&law, 5, 77).unwrap();
        let o = sample_omc_block(&law, 5, derive_seed(77, streams::BOMC_BLOCK, 0)).unwrap();
        assert_eq!(b.rows(), o.rows());
    }

    #[test]
    fn rotation_is_orthogonal() {
        for d in [1, 2, 7, 32] {
            let r = random_rotation(d, d as u64);
            let rtr = r.transpose().matmul(&r);
            assert!(rtr.max_abs_diff(&Matrix::identity(d)) <= 1e-10, "d = {d}");
        }
        let one = random_rotation(1, 4);
        assert_eq!(one[(0, 0)].abs(), 1.0);
    }

    #[test]
    fn rotation_preserves_gram() {
        let e = sample_bomc(&IsotropicLaw::gaussian(6), 15, 8).unwrap();
        let r = random_rotation(6, 1);
        let rotated = e.rotated(&r);
        assert!(rotated.rows().gram().max_abs_diff(&e.rows().gram()) <= 1e-9);
    }
}
