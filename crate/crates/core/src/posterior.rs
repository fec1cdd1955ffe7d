//! Rank-one matrix inference with a uniform spherical prior.
//!
//! Observing `Y = x xᵀ + N` with Gaussian noise of scale `γ`, the posterior over
//! unit `x` is Bingham with `A = Y / (2γ²)`.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{eigendecompose, norm2, SymmetricMatrix};
use crate::sampler::{sample_bingham, SampleBatch, SamplerConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub y: SymmetricMatrix,
    pub gamma: f64,
}

impl Observation {
    pub fn new(y: SymmetricMatrix, gamma: f64) -> Result<Self> {
        check_gamma(gamma)?;
        Ok(Self { y, gamma })
    }

    pub fn dim(&self) -> usize {
        self.y.dim()
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("noise scale gamma must be positive, got {gamma}")))
    }
}

/// `A = Y / (2γ²)`.
pub fn build_posterior(obs: &Observation) -> Result<SymmetricMatrix> {
    check_gamma(obs.gamma)?;
    let a = obs.y.scaled(1.0 / (2.0 * obs.gamma * obs.gamma));
    if !a.is_finite() {
        return Err(Error::invalid("posterior matrix overflows; gamma is too small"));
    }
    Ok(a)
}

/// `Y = x₀x₀ᵀ + γ (G + Gᵀ)/2` with `G` i.i.d. standard normal.
///
/// `gamma = 0` is allowed and gives the noiseless observation; such an
/// observation is rejected later by [`build_posterior`].
pub fn generate_synthetic<R: Rng + ?Sized>(x0: &[f64], gamma: f64, rng: &mut R) -> Result<Observation> {
    let d = x0.len();
    if d == 0 {
        return Err(Error::invalid("planted vector is empty"));
    }
    if (norm2(x0) - 1.0).abs() > 1e-10 {
        return Err(Error::invalid("planted vector must have unit norm"));
    }
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::invalid(format!("noise scale gamma must be nonnegative, got {gamma}")));
    }
    let g: Vec<f64> = (0..d * d).map(|_| rng.sample(StandardNormal)).collect();
    let mut y = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            y[i * d + j] = x0[i] * x0[j] + gamma * 0.5 * (g[i * d + j] + g[j * d + i]);
        }
    }
    Ok(Observation { y: SymmetricMatrix::from_row_major(d, y)?, gamma })
}

pub fn posterior_sample(obs: &Observation, count: usize, cfg: &SamplerConfig) -> Result<SampleBatch> {
    sample_bingham(&build_posterior(obs)?, count, cfg)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorSummary {
    /// Posterior mean of `x xᵀ`.
    pub mmse: SymmetricMatrix,
    /// Leading eigenvector of `mmse`; its sign is arbitrary.
    pub top_direction: Vec<f64>,
    pub sample_count: usize,
    pub trace: f64,
}

pub fn mmse_estimate(batch: &SampleBatch) -> Result<PosteriorSummary> {
    let first = batch.samples.first().ok_or_else(|| Error::invalid("empty sample batch"))?;
    let d = first.len();
    let mut acc = vec![0.0; d * d];
    for x in &batch.samples {
        if x.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: x.len() });
        }
        for i in 0..d {
            for j in i..d {
                acc[i * d + j] += x[i] * x[j];
            }
        }
    }
    let count = batch.samples.len() as f64;
    for i in 0..d {
        for j in i..d {
            let v = acc[i * d + j] / count;
            acc[i * d + j] = v;
            acc[j * d + i] = v;
        }
    }
    let mmse = SymmetricMatrix::from_row_major(d, acc)?;
    let eig = eigendecompose(&mmse)?;
    let top_direction = eig.vectors.column(d - 1);
    Ok(PosteriorSummary { trace: mmse.trace(), mmse, top_direction, sample_count: batch.samples.len() })
}
