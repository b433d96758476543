//! Structured Monte Carlo ensembles and the estimators built on top of them.
//!
//! The crate produces sample ensembles for isotropic laws in several flavours
//! (iid, orthogonal, block-orthogonal, randomized Halton, and two
//! near-orthogonal constructions) and plugs them into random-feature kernel
//! approximation and sliced Wasserstein distance estimation. The
//! [`diagnostics`] module checks negative dependence and concentration
//! properties of orthogonal ensembles empirically.
//!
//! Every randomized routine is a pure function of an explicit `u64` seed.
//! Parallel loops collect per-trial results in index order and reduce them
//! sequentially, so outputs do not depend on the number of worker threads.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod ensembles;
mod error;
pub mod kernels;
pub mod matrix;
pub mod method;
pub mod nomc;
pub mod seed;
pub mod stats;
pub mod swd;
pub mod table;

pub use error::{Error, Result};
pub use matrix::Matrix;
