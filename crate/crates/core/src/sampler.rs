//! Exact Bingham sampling by rejection from the polynomial proposal
//! `q(z) ∝ (zᵀ(I + D/n)z)ⁿ`.
//!
//! The target `exp(xᵀAx)` is rotated into the eigenbasis of `A` and shifted so the
//! smallest eigenvalue is zero. With `n ≥ gap²` the log-ratio between the
//! unnormalized target and proposal lies in `[−gap²/(2n), 0]`, so accepting with
//! probability `e⁻¹ · exp(zᵀDz) / (zᵀ(I + D/n)z)ⁿ` is always valid and succeeds
//! with probability at least `e⁻¹`.

use rand::distr::Open01;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cdf::{MarginalCdf, DEFAULT_CDF_TOLERANCE};
use crate::error::{Error, Result};
use crate::linalg::{
    eigendecompose, norm2, quadratic_form_diag, rotate, DenseMatrix, EigenDecomposition, SymmetricMatrix,
};
use crate::special::log1p_gap;

/// Largest proposal exponent accepted; the per-coordinate tables are `O(n)`.
pub const MAX_EXPONENT: u64 = 1 << 26;

/// Eigenbasis, shifted spectrum and proposal exponent for one target matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumShift {
    pub basis: DenseMatrix,
    /// `λ − λ_min`, ascending; the first entry is exactly zero.
    pub shifted: Vec<f64>,
    pub exponent: u64,
    pub gap: f64,
}

pub fn shift_spectrum(eig: &EigenDecomposition) -> SpectrumShift {
    let lmin = eig.min_value();
    let shifted: Vec<f64> = eig.values.iter().map(|l| l - lmin).collect();
    let gap = shifted[shifted.len() - 1];
    SpectrumShift { basis: eig.vectors.clone(), shifted, exponent: proposal_exponent(gap), gap }
}

/// `max(1, ⌈gap²⌉)`.
pub fn proposal_exponent(gap: f64) -> u64 {
    let sq = (gap * gap).ceil();
    if sq >= u64::MAX as f64 {
        u64::MAX
    } else {
        (sq as u64).max(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub seed: u64,
    pub max_rejections: u64,
    pub cdf_tolerance: f64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self { seed: 0, max_rejections: 1_000_000, cdf_tolerance: DEFAULT_CDF_TOLERANCE }
    }
}

impl SamplerConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_rejections < 1 {
            return Err(Error::invalid("max_rejections must be at least 1"));
        }
        if !(self.cdf_tolerance > 0.0 && self.cdf_tolerance <= 1e-6) {
            return Err(Error::invalid(format!("cdf_tolerance must lie in (0, 1e-6], got {}", self.cdf_tolerance)));
        }
        Ok(())
    }
}

/// One accepted draw and the number of proposals it took.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub x: Vec<f64>,
    pub proposals: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    pub samples: Vec<Vec<f64>>,
    pub proposals_used: Vec<u64>,
    pub seed: u64,
    pub total_acceptance_rate: f64,
}

impl SampleBatch {
    fn from_samples(samples: Vec<Sample>, seed: u64) -> Self {
        let total: u64 = samples.iter().map(|s| s.proposals).sum();
        let rate = if total == 0 { 0.0 } else { samples.len() as f64 / total as f64 };
        let (xs, props) = samples.into_iter().map(|s| (s.x, s.proposals)).unzip();
        Self { samples: xs, proposals_used: props, seed, total_acceptance_rate: rate }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.samples.first().map_or(0, Vec::len)
    }
}

/// `y² · d[0] + (1 − y²) · d[1..]`: the diagonal of the proposal conditioned on
/// the leading coordinate's direction cosine `y`.
pub fn conditional_diag(current: &[f64], y_head: f64) -> Vec<f64> {
    let y2 = y_head * y_head;
    let rest = (1.0 - y_head) * (1.0 + y_head);
    let head = current[0] * y2;
    current[1..].iter().map(|v| (head + rest * v).max(0.0)).collect()
}

/// Draws from `q(z) ∝ (zᵀ(I + D/n)z)ⁿ` one coordinate at a time.
///
/// At each step the remaining coordinates live on a sphere of radius `r`; the
/// direction cosine of the next coordinate is drawn by inverting its marginal CDF
/// and the diagonal is updated with [`conditional_diag`].
pub fn sample_proposal<R: Rng + ?Sized>(
    shifted: &[f64],
    exponent: u64,
    rng: &mut R,
    tolerance: f64,
) -> Result<Vec<f64>> {
    let d = shifted.len();
    let n = exponent as f64;
    let mut z = vec![0.0; d];
    let mut radius = 1.0;
    let mut current = shifted.to_vec();
    let mut rest = Vec::with_capacity(d);
    for i in 0..d {
        let m = d - i;
        if m == 1 {
            z[i] = if rng.random::<bool>() { radius } else { -radius };
            break;
        }
        rest.clear();
        rest.extend(current[1..].iter().map(|v| 1.0 + v / n));
        let marginal = MarginalCdf::build(1.0 + current[0] / n, &rest, exponent as usize, m)?;
        let u: f64 = rng.sample(Open01);
        let y = marginal.invert_with_tolerance(u, tolerance)?;
        z[i] = y * radius;
        radius *= ((1.0 - y) * (1.0 + y)).sqrt();
        current = conditional_diag(&current, y);
    }
    let norm = norm2(&z);
    z.iter_mut().for_each(|v| *v /= norm);
    Ok(z)
}

/// `−1 + zᵀDz − n ln(zᵀ(I + D/n)z)` for unit `z`, always in `[−1, −1 + max(D)²/(2n)]`.
pub fn log_accept_ratio(shifted: &[f64], exponent: u64, z: &[f64]) -> f64 {
    let n = exponent as f64;
    let quad = quadratic_form_diag(shifted, z).expect("proposal dimension matches spectrum");
    let value = -1.0 + n * log1p_gap(quad / n);
    assert!(value <= 1e-12, "acceptance log-ratio {value} is positive");
    value
}

/// Rejection sampler for `p(x) ∝ exp(xᵀAx)` on the unit sphere.
#[derive(Debug, Clone)]
pub struct BinghamSampler {
    shift: SpectrumShift,
}

impl BinghamSampler {
    pub fn new(a: &SymmetricMatrix) -> Result<Self> {
        let eig = eigendecompose(a)?;
        let shift = shift_spectrum(&eig);
        if shift.exponent > MAX_EXPONENT {
            return Err(Error::invalid(format!(
                "spectral gap {} needs proposal exponent {} (limit {MAX_EXPONENT})",
                shift.gap, shift.exponent
            )));
        }
        Ok(Self { shift })
    }

    pub fn shift(&self) -> &SpectrumShift {
        &self.shift
    }

    pub fn dim(&self) -> usize {
        self.shift.shifted.len()
    }

    /// Deterministic substream for sample `index` under `seed`.
    pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        rng
    }

    /// One rejection-sampling round: draw a proposal, flip the acceptance coin.
    /// Returns the proposal in the eigenbasis and whether it was accepted.
    pub fn propose<R: Rng + ?Sized>(&self, rng: &mut R, tolerance: f64) -> Result<(Vec<f64>, bool)> {
        let z = sample_proposal(&self.shift.shifted, self.shift.exponent, rng, tolerance)?;
        let log_ratio = log_accept_ratio(&self.shift.shifted, self.shift.exponent, &z);
        let u: f64 = rng.random();
        Ok((z, u < log_ratio.exp()))
    }

    /// Sample number `index` of the stream defined by `cfg.seed`.
    pub fn sample_at(&self, index: u64, cfg: &SamplerConfig) -> Result<Sample> {
        let mut rng = Self::stream(cfg.seed, index);
        if self.shift.gap == 0.0 {
            return Ok(Sample { x: uniform_on_sphere(self.dim(), &mut rng), proposals: 1 });
        }
        for attempt in 1..=cfg.max_rejections {
            let (z, accepted) = self.propose(&mut rng, cfg.cdf_tolerance)?;
            if accepted {
                return Ok(Sample { x: rotate(&self.shift.basis, &z)?, proposals: attempt });
            }
        }
        Err(Error::RejectionLimit(cfg.max_rejections))
    }

    /// Samples `0..count`, each on its own substream; order follows the index.
    pub fn sample_batch(&self, count: usize, cfg: &SamplerConfig) -> Result<SampleBatch> {
        cfg.validate()?;
        if count == 0 {
            return Err(Error::invalid("sample count must be at least 1"));
        }
        let samples = (0..count as u64).into_par_iter().map(|i| self.sample_at(i, cfg)).collect::<Result<Vec<_>>>()?;
        Ok(SampleBatch::from_samples(samples, cfg.seed))
    }

    /// Runs `proposals` rejection rounds (proposal `j` on substream `j`) without the
    /// zero-gap shortcut and returns how many were accepted.
    pub fn count_acceptances(&self, proposals: u64, seed: u64, tolerance: f64) -> Result<u64> {
        let accepted = (0..proposals)
            .into_par_iter()
            .map(|j| {
                let mut rng = Self::stream(seed, j);
                self.propose(&mut rng, tolerance).map(|(_, ok)| ok as u64)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(accepted.into_iter().sum())
    }
}

/// Normalized standard Gaussian vector.
pub fn uniform_on_sphere<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let mut v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let norm = norm2(&v);
        if norm > 0.0 {
            v.iter_mut().for_each(|x| *x /= norm);
            return v;
        }
    }
}

/// Draws `count` i.i.d. samples from `exp(xᵀAx)` on the unit sphere.
pub fn sample_bingham(a: &SymmetricMatrix, count: usize, cfg: &SamplerConfig) -> Result<SampleBatch> {
    BinghamSampler::new(a)?.sample_batch(count, cfg)
}
