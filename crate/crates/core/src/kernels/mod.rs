//! Kernel specifications, random-feature maps and the MSE benchmark.

mod bench;
mod dataset;
mod features;
mod spec;

pub use bench::{mse_benchmark, BenchSettings};
pub use dataset::{
    fiftieth_nn_scale, load_csv_matrix, sample_pairs, synthetic_pairs, Dataset, DEFAULT_SCALE_SAMPLE, NN_RANK,
};
pub use features::{draw_phases, mc_kernel_oracle, png_nonlinearity, FeatureBundle};
pub use spec::{
    exact_kernel, ln_bessel_k, matern_bessel, matern_correlation, png_quadrature, spectral_law, KernelFamily,
    KernelSpec,
};
