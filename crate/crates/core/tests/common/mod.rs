//! Oracles shared by the integration tests. They are written independently of
//! the library's own quadrature and linear algebra.
#![allow(dead_code)]

use std::f64::consts::PI;

use bingham::SymmetricMatrix;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn random_orthogonal(d: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let g = DMatrix::from_fn(d, d, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    // sign fix makes the draw Haar
    let signs = DMatrix::from_diagonal(&r.diagonal().map(|v| if v < 0.0 { -1.0 } else { 1.0 }));
    q * signs
}

pub fn to_symmetric(a: &DMatrix<f64>) -> SymmetricMatrix {
    let d = a.nrows();
    SymmetricMatrix::from_rows(&(0..d).map(|i| (0..d).map(|j| a[(i, j)]).collect()).collect::<Vec<_>>()).unwrap()
}

pub fn to_nalgebra(a: &SymmetricMatrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(a.dim(), a.dim(), a.as_slice())
}

/// Random symmetric matrix with eigenvalues spanning exactly `gap` before rotation.
pub fn random_with_gap(d: usize, gap: f64, rng: &mut ChaCha8Rng) -> SymmetricMatrix {
    let offset: f64 = rng.random_range(-2.0..2.0);
    let mut values: Vec<f64> = (0..d).map(|_| offset + gap * rng.random::<f64>()).collect();
    values[0] = offset;
    values[d - 1] = offset + gap;
    let q = random_orthogonal(d, rng);
    to_symmetric(&(&q * DMatrix::from_diagonal(&DVector::from_vec(values)) * q.transpose()))
}

pub fn unit_vector(d: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / n).collect()
}

/// Gauss–Legendre nodes and weights on [-1, 1], by Newton on P_n.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let step = p1 / dp;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

const PSI_POINTS: usize = 256;

/// CDF of one coordinate under an unnormalized log-density on S¹ or S²,
/// tabulated in the polar angle φ = acos(x_coord), where it is smooth.
pub struct AngleOracle {
    phis: Vec<f64>,
    upper_tail: Vec<f64>,
}

impl AngleOracle {
    pub fn new<F: Fn(&[f64]) -> f64>(dim: usize, coord: usize, cells: usize, log_density: F) -> Self {
        assert!(dim == 2 || dim == 3);
        let others: Vec<usize> = (0..dim).filter(|&i| i != coord).collect();
        let point = |phi: f64, psi: f64| {
            let (s, c) = phi.sin_cos();
            let mut x = vec![0.0; dim];
            x[coord] = c;
            if dim == 2 {
                x[others[0]] = s * psi.cos().signum();
            } else {
                x[others[0]] = s * psi.cos();
                x[others[1]] = s * psi.sin();
            }
            x
        };
        // coarse scan for an overflow guard
        let mut shift = f64::NEG_INFINITY;
        for i in 0..=64 {
            for j in 0..64 {
                shift = shift.max(log_density(&point(PI * i as f64 / 64.0, 2.0 * PI * j as f64 / 64.0)));
            }
        }
        let g = |phi: f64| -> f64 {
            if dim == 2 {
                (log_density(&point(phi, 0.0)) - shift).exp() + (log_density(&point(phi, PI)) - shift).exp()
            } else {
                // periodic trapezoid converges geometrically in ψ
                let sum: f64 = (0..PSI_POINTS)
                    .map(|j| (log_density(&point(phi, 2.0 * PI * j as f64 / PSI_POINTS as f64)) - shift).exp())
                    .sum();
                phi.sin() * sum * 2.0 * PI / PSI_POINTS as f64
            }
        };
        let phis: Vec<f64> = (0..=cells).map(|i| PI * i as f64 / cells as f64).collect();
        let rule = gauss_legendre(16);
        let mut upper_tail = vec![0.0; cells + 1];
        for i in (0..cells).rev() {
            let (mid, half) = (0.5 * (phis[i] + phis[i + 1]), 0.5 * (phis[i + 1] - phis[i]));
            let cell: f64 = rule.iter().map(|(x, w)| w * g(mid + half * x)).sum::<f64>() * half;
            upper_tail[i] = upper_tail[i + 1] + cell;
        }
        let total = upper_tail[0];
        upper_tail.iter_mut().for_each(|v| *v /= total);
        Self { phis, upper_tail }
    }

    /// Bingham `exp(xᵀAx)` with diagonal `A`.
    pub fn bingham_diag(diag: &[f64], coord: usize, cells: usize) -> Self {
        let diag = diag.to_vec();
        Self::new(diag.len(), coord, cells, move |x| diag.iter().zip(x).map(|(l, v)| l * v * v).sum())
    }

    /// P(x_coord ≤ t) = P(φ ≥ acos t), linear in φ between nodes.
    pub fn cdf(&self, t: f64) -> f64 {
        let phi = t.clamp(-1.0, 1.0).acos();
        let h = self.phis[1];
        let i = ((phi / h) as usize).min(self.phis.len() - 2);
        let w = (phi - self.phis[i]) / h;
        self.upper_tail[i] + w * (self.upper_tail[i + 1] - self.upper_tail[i])
    }

    /// Exact node values: `(t, P(x_coord ≤ t))`.
    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.phis.iter().zip(&self.upper_tail).map(|(p, v)| (p.cos(), *v))
    }
}

pub fn ks<F: Fn(f64) -> f64>(mut xs: Vec<f64>, cdf: F) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

pub fn ks_critical(n: usize) -> f64 {
    1.63 / (n as f64).sqrt()
}
