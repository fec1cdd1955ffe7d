mod common;

use bingham::sampler::{sample_proposal, BinghamSampler};
use bingham::{sample_bingham, SampleBatch, SamplerConfig, SymmetricMatrix};
use common::{
    gauss_legendre, ks, ks_critical, random_orthogonal, random_with_gap, to_nalgebra, to_symmetric, AngleOracle,
};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn second_moments(batch: &SampleBatch) -> (DMatrix<f64>, DMatrix<f64>) {
    // mean of x xᵀ and the standard error of each entry
    let d = batch.dim();
    let n = batch.len() as f64;
    let mut sum = DMatrix::<f64>::zeros(d, d);
    let mut sq = DMatrix::<f64>::zeros(d, d);
    for x in &batch.samples {
        for i in 0..d {
            for j in 0..d {
                let v = x[i] * x[j];
                sum[(i, j)] += v;
                sq[(i, j)] += v * v;
            }
        }
    }
    let mean = &sum / n;
    let se = DMatrix::from_fn(d, d, |i, j| ((sq[(i, j)] / n - mean[(i, j)].powi(2)).max(0.0) / n).sqrt());
    (mean, se)
}

#[test]
fn same_seed_same_bits() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let a = random_with_gap(4, 6.0, &mut rng);
    let cfg = SamplerConfig::with_seed(77);
    let first = sample_bingham(&a, 300, &cfg).unwrap();
    let second = sample_bingham(&a, 300, &cfg).unwrap();
    assert_eq!(first, second);

    // sample i depends only on (seed, i), not on the batch around it
    let sampler = BinghamSampler::new(&a).unwrap();
    let single = sampler.sample_at(123, &cfg).unwrap();
    assert_eq!(single.x, first.samples[123]);
    assert_eq!(single.proposals, first.proposals_used[123]);

    let other = sample_bingham(&a, 300, &SamplerConfig::with_seed(78)).unwrap();
    assert_ne!(first.samples, other.samples);
}

#[test]
fn samples_are_unit_vectors_with_counted_proposals() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for d in [1usize, 2, 3, 7] {
        let a = random_with_gap(d, 3.0 * d as f64, &mut rng);
        let batch = sample_bingham(&a, 500, &SamplerConfig::with_seed(d as u64)).unwrap();
        for (x, &p) in batch.samples.iter().zip(&batch.proposals_used) {
            assert!((x.iter().map(|v| v * v).sum::<f64>() - 1.0).abs() < 1e-13);
            assert!(p >= 1);
        }
        let total: u64 = batch.proposals_used.iter().sum();
        assert!((batch.total_acceptance_rate - 500.0 / total as f64).abs() < 1e-15);
    }
}

#[test]
fn exact_diagonal_shift_changes_nothing() {
    let a = SymmetricMatrix::from_diagonal(&[0.5, 1.25, 3.0, -0.75]).unwrap();
    let b = SymmetricMatrix::from_diagonal(&[2.5, 3.25, 5.0, 1.25]).unwrap();
    let cfg = SamplerConfig::with_seed(5);
    assert_eq!(sample_bingham(&a, 400, &cfg).unwrap().samples, sample_bingham(&b, 400, &cfg).unwrap().samples);
}

#[test]
fn general_shift_changes_samples_only_by_rounding() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    // a gap away from integer n, so rounding cannot change ⌈gap²⌉
    let a = random_with_gap(5, 7.3, &mut rng);
    let shifted = to_symmetric(&(to_nalgebra(&a) + DMatrix::identity(5, 5) * 3.7));
    let (sa, sb) = (BinghamSampler::new(&a).unwrap(), BinghamSampler::new(&shifted).unwrap());
    assert_eq!(sa.shift().exponent, sb.shift().exponent);
    let cfg = SamplerConfig::with_seed(9);
    let x = sa.sample_batch(1000, &cfg).unwrap();
    let y = sb.sample_batch(1000, &cfg).unwrap();
    // each decomposition picks its own eigenvector signs, so compare |Vᵀx|
    let coords = |s: &BinghamSampler, v: &[f64]| -> Vec<f64> {
        s.shift().basis.transpose_mul_vec(v).unwrap().into_iter().map(f64::abs).collect()
    };
    let far = x
        .samples
        .iter()
        .zip(&y.samples)
        .filter(|(u, v)| coords(&sa, u).iter().zip(coords(&sb, v)).any(|(p, q)| (p - q).abs() > 1e-8))
        .count();
    assert!(far <= 10, "{far} of 1000 samples moved");
}

#[test]
fn rotating_the_matrix_rotates_the_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let a = random_with_gap(3, 5.0, &mut rng);
    let q = random_orthogonal(3, &mut rng);
    let rotated = to_symmetric(&(&q * to_nalgebra(&a) * q.transpose()));
    let n = 20_000;
    let (m_a, se_a) = second_moments(&sample_bingham(&a, n, &SamplerConfig::with_seed(10)).unwrap());
    let (m_r, se_r) = second_moments(&sample_bingham(&rotated, n, &SamplerConfig::with_seed(11)).unwrap());
    let back = q.transpose() * m_r * &q;
    for i in 0..3 {
        for j in 0..3 {
            // the rotated standard error is bounded by the largest entrywise one
            let se = (se_a[(i, j)].powi(2) + se_r.max().powi(2) * 3.0).sqrt();
            assert!((back[(i, j)] - m_a[(i, j)]).abs() < 4.0 * se, "({i},{j}) {} vs {}", back[(i, j)], m_a[(i, j)]);
        }
    }
}

#[test]
fn antipodal_symmetry_centers_the_mean() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let a = random_with_gap(4, 10.0, &mut rng);
    let n = 20_000;
    let batch = sample_bingham(&a, n, &SamplerConfig::with_seed(12)).unwrap();
    let mut mean = [0.0; 4];
    for x in &batch.samples {
        for k in 0..4 {
            mean[k] += x[k] / n as f64;
        }
    }
    let norm = mean.iter().map(|v| v * v).sum::<f64>().sqrt();
    assert!(norm <= 4.0 / (n as f64).sqrt(), "{norm}");
}

#[test]
fn scalar_matrix_is_uniform() {
    let a = SymmetricMatrix::from_diagonal(&[2.0; 5]).unwrap();
    let batch = sample_bingham(&a, 20_000, &SamplerConfig::with_seed(13)).unwrap();
    assert!(batch.proposals_used.iter().all(|&p| p == 1));
    let (mean, se) = second_moments(&batch);
    for i in 0..5 {
        for j in 0..5 {
            let target = if i == j { 0.2 } else { 0.0 };
            assert!((mean[(i, j)] - target).abs() < 4.0 * se[(i, j)], "({i},{j}) {}", mean[(i, j)]);
        }
    }
}

#[test]
fn circle_second_moment_matches_quadrature() {
    // exp(4 sin²θ) on the circle; E[x₂²] by Gauss–Legendre in θ
    let rule = gauss_legendre(40);
    let (mut num, mut den) = (0.0, 0.0);
    let cells = 64;
    for c in 0..cells {
        let (a, b) = (
            2.0 * std::f64::consts::PI * c as f64 / cells as f64,
            2.0 * std::f64::consts::PI * (c + 1) as f64 / cells as f64,
        );
        for (x, w) in &rule {
            let theta = 0.5 * (a + b) + 0.5 * (b - a) * x;
            let s2 = theta.sin().powi(2);
            let f = w * (4.0 * s2).exp();
            num += f * s2;
            den += f;
        }
    }
    let expected = num / den;
    let a = SymmetricMatrix::from_diagonal(&[0.0, 4.0]).unwrap();
    let (mean, se) = second_moments(&sample_bingham(&a, 40_000, &SamplerConfig::with_seed(14)).unwrap());
    assert!((mean[(1, 1)] - expected).abs() < 4.0 * se[(1, 1)], "{} vs {expected}", mean[(1, 1)]);
}

#[test]
fn proposal_marginal_matches_quadrature() {
    // D = diag(0, 5), n = 25: proposal density (z₁² + 1.2 z₂²)²⁵ on the circle
    let shifted = [0.0, 5.0];
    let count = 20_000;
    let draws: Vec<Vec<f64>> = (0..count as u64)
        .map(|i| sample_proposal(&shifted, 25, &mut BinghamSampler::stream(15, i), 1e-13).unwrap())
        .collect();
    for coord in 0..2 {
        let oracle = AngleOracle::new(2, coord, 2048, |z| 25.0 * (z[0] * z[0] + 1.2 * z[1] * z[1]).ln());
        let stat = ks(draws.iter().map(|z| z[coord]).collect(), |t| oracle.cdf(t));
        assert!(stat < ks_critical(count), "coordinate {coord}: {stat}");
    }
}

#[test]
fn large_gap_concentrates_on_the_top_eigenvector() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let q = random_orthogonal(3, &mut rng);
    let a = to_symmetric(&(&q * DMatrix::from_diagonal(&nalgebra::dvector![0.0, 20.0, 100.0]) * q.transpose()));
    let batch = sample_bingham(&a, 30, &SamplerConfig::with_seed(17)).unwrap();
    let top = q.column(2);
    for x in &batch.samples {
        let overlap: f64 = x.iter().zip(top.iter()).map(|(p, q)| p * q).sum();
        // 1 − overlap² ~ Exp(80) in the two weaker directions
        assert!(overlap.abs() > 0.9, "{overlap}");
    }
}
