//! Exact sampling from the Bingham distribution `p(x) ∝ exp(xᵀAx)` on the unit
//! sphere, by rejection from a polynomial proposal that is itself sampled exactly
//! through its one-dimensional marginal CDFs.

pub mod cdf;
pub mod error;
pub mod linalg;
pub mod moments;
pub mod posterior;
pub mod sampler;
pub mod special;
pub mod validation;

pub use error::{Error, Result};
pub use linalg::{eigendecompose, DenseMatrix, EigenDecomposition, SymmetricMatrix};
pub use posterior::{
    build_posterior, generate_synthetic, mmse_estimate, posterior_sample, Observation, PosteriorSummary,
};
pub use sampler::{sample_bingham, BinghamSampler, Sample, SampleBatch, SamplerConfig};
