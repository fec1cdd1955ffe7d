mod common;

use bingham::cdf::MarginalCdf;
use bingham::moments::{gaussian_norm_moment_log, gaussian_qf_moments};
use common::AngleOracle;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::ln_gamma;

/// Marginal density of the leading coordinate, up to a constant, expanded
/// binomially with sphere moments from the direct (quadratic-time) recursion.
fn integrand(a_head: f64, rest: &[f64], n: usize, t: f64) -> f64 {
    let m = rest.len() + 1;
    let alpha = (m as f64 - 3.0) / 2.0;
    let table = gaussian_qf_moments(rest, n).unwrap();
    let x = t * t;
    let mut sum = 0.0;
    for k in 0..=n {
        let ln_binom = ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0);
        let ln_e = (table.log_gaussian_moment(k) / gaussian_norm_moment_log(rest.len(), k)).ln();
        let w = ln_binom + (n - k) as f64 * a_head.ln() + ln_e;
        sum += (w + (n - k) as f64 * x.ln() + k as f64 * (1.0 - x).ln()).exp();
    }
    (1.0 - x).powf(alpha) * sum
}

#[test]
fn density_is_proportional_to_the_binomial_integrand() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..6 {
        let m = rng.random_range(2..=5usize);
        let n = rng.random_range(1..=25usize);
        let diag: Vec<f64> = (0..m).map(|_| 1.0 + rng.random_range(0.0..4.0) / n as f64).collect();
        let marginal = MarginalCdf::build(diag[0], &diag[1..], n, m).unwrap();
        let mut ratios = Vec::new();
        for i in 1..60 {
            let t = -0.95 + 1.9 * i as f64 / 60.0;
            if t.abs() < 1e-3 {
                continue;
            }
            let h = 1e-5;
            let numeric = (marginal.cdf(t + h).unwrap() - marginal.cdf(t - h).unwrap()) / (2.0 * h);
            let direct = marginal.density(t).unwrap();
            assert!(numeric >= 0.0);
            assert!((numeric - direct).abs() <= 1e-6 * direct.max(1e-3), "m={m} n={n} t={t}");
            ratios.push(direct / integrand(diag[0], &diag[1..], n, t));
        }
        let first = ratios[0];
        for r in &ratios {
            assert!((r / first - 1.0).abs() <= 1e-6, "m={m} n={n}: {r} vs {first}");
        }
    }
}

#[test]
fn cdf_matches_angular_quadrature_for_small_spheres() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..8 {
        let m = rng.random_range(2..=3usize);
        let n = rng.random_range(1..=30usize);
        let diag: Vec<f64> = (0..m).map(|_| 1.0 + rng.random_range(0.0..5.0) / n as f64).collect();
        let marginal = MarginalCdf::build(diag[0], &diag[1..], n, m).unwrap();
        let d2 = diag.clone();
        let oracle =
            AngleOracle::new(m, 0, 400, move |z| n as f64 * d2.iter().zip(z).map(|(l, v)| l * v * v).sum::<f64>().ln());
        for (t, expected) in oracle.nodes() {
            let got = marginal.cdf(t.clamp(-1.0, 1.0)).unwrap();
            assert!((got - expected).abs() < 1e-8, "m={m} n={n} t={t}: {got} vs {expected}");
        }
    }
}

#[test]
fn uniform_inversion_example() {
    let uniform = MarginalCdf::build(1.0, &[1.0, 1.0], 3, 3).unwrap();
    assert!((uniform.invert(0.75).unwrap() - 0.5).abs() < 1e-12);
    assert_eq!(uniform.invert(0.5).unwrap(), 0.0);
    assert!(uniform.invert(0.0).is_err());
    assert!(uniform.invert(1.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn roundtrip_monotone_and_even(
        m in 2usize..7,
        n in 1usize..400,
        spread in prop::collection::vec(0.0f64..1.0, 6),
        gap in 0.0f64..20.0,
        r in 0.0005f64..0.9995,
    ) {
        let diag: Vec<f64> = spread[..m].iter().map(|s| 1.0 + gap * s / n as f64).collect();
        let marginal = MarginalCdf::build(diag[0], &diag[1..], n, m).unwrap();
        let t = marginal.invert(r).unwrap();
        prop_assert!((marginal.cdf(t).unwrap() - r).abs() <= 1e-12);
        prop_assert!((marginal.cdf(-t).unwrap() + marginal.cdf(t).unwrap() - 1.0).abs() <= 1e-13);
        let t2 = marginal.invert((r + 0.0004).min(0.9999)).unwrap();
        prop_assert!(t2 >= t);
    }
}

#[test]
fn monotone_on_a_fine_grid_for_large_exponents() {
    for (n, rest) in [(625usize, vec![1.04, 1.01, 1.0]), (40_000, vec![1.005, 1.000_1, 1.002])] {
        let marginal = MarginalCdf::build(1.0, &rest, n, rest.len() + 1).unwrap();
        let mut prev = 0.0;
        for i in 0..=1000 {
            let t = -1.0 + i as f64 / 500.0;
            let g = marginal.cdf(t).unwrap();
            assert!(g >= prev, "n={n} t={t}");
            prev = g;
        }
        assert_eq!(prev, 1.0);
    }
}

#[test]
fn tails_keep_relative_accuracy() {
    let rule = common::gauss_legendre(20);
    for (n, rest) in [(50usize, vec![1.02, 1.05]), (625, vec![1.04, 1.01, 1.0])] {
        let m = rest.len() + 1;
        let marginal = MarginalCdf::build(1.0, &rest, n, m).unwrap();
        for t in [-0.95, -0.9, -0.8, -0.6] {
            // ∫_{-1}^{t} f, in cells that shrink toward the singular endpoint
            let mut mass = 0.0;
            let cells = 400;
            for c in 0..cells {
                let (a, b) = (
                    -1.0 + (t + 1.0) * (c as f64 / cells as f64).powi(2),
                    -1.0 + (t + 1.0) * ((c + 1) as f64 / cells as f64).powi(2),
                );
                let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
                mass += half * rule.iter().map(|(x, w)| w * marginal.density(mid + half * x).unwrap()).sum::<f64>();
            }
            let got = marginal.cdf(t).unwrap();
            assert!(got > 0.0);
            assert!((got / mass - 1.0).abs() < 1e-8, "n={n} t={t}: {got:e} vs {mass:e}");
        }
    }
}
