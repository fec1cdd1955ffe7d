//! Moments of quadratic forms `xᵀMx` for diagonal PSD `M`, under the standard
//! Gaussian and under the uniform measure on the sphere.
//!
//! Everything is returned as a [`LogScalar`]: the moments overflow `f64` long
//! before the exponents the sampler needs (`n!` alone overflows near 170), and
//! every quantity involved is nonnegative, so no sign bookkeeping is needed.

use std::f64::consts::PI;
use std::ops::{Add, Div, Mul};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{ln_gamma, log_sum_exp};

/// Nonnegative real stored as its natural logarithm; `-inf` encodes zero.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct LogScalar(f64);

impl LogScalar {
    pub const ZERO: LogScalar = LogScalar(f64::NEG_INFINITY);
    pub const ONE: LogScalar = LogScalar(0.0);

    pub fn from_ln(ln: f64) -> Self {
        debug_assert!(!ln.is_nan());
        LogScalar(ln)
    }

    pub fn from_value(value: f64) -> Result<Self> {
        if !(value >= 0.0) {
            return Err(Error::invalid(format!("log scalar needs a nonnegative value, got {value}")));
        }
        Ok(LogScalar(value.ln()))
    }

    #[inline]
    pub fn ln(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0.exp()
    }

    pub fn is_zero(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }

    /// Log-sum-exp of the items; exact `ZERO` for an empty iterator.
    pub fn sum<I: IntoIterator<Item = LogScalar>>(items: I) -> LogScalar {
        let logs: Vec<f64> = items.into_iter().map(LogScalar::ln).collect();
        LogScalar(log_sum_exp(&logs))
    }

    pub fn powi(self, k: u64) -> LogScalar {
        if k == 0 {
            LogScalar::ONE
        } else {
            LogScalar(self.0 * k as f64)
        }
    }
}

impl Mul for LogScalar {
    type Output = LogScalar;
    fn mul(self, rhs: LogScalar) -> LogScalar {
        LogScalar(self.0 + rhs.0)
    }
}

impl Div for LogScalar {
    type Output = LogScalar;
    fn div(self, rhs: LogScalar) -> LogScalar {
        LogScalar(self.0 - rhs.0)
    }
}

impl Add for LogScalar {
    type Output = LogScalar;
    fn add(self, rhs: LogScalar) -> LogScalar {
        LogScalar(log_sum_exp(&[self.0, rhs.0]))
    }
}

fn check_psd(lambda: &[f64]) -> Result<()> {
    if lambda.is_empty() {
        return Err(Error::invalid("eigenvalue list is empty"));
    }
    if let Some(bad) = lambda.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
        return Err(Error::invalid(format!("eigenvalues must be finite and nonnegative, got {bad}")));
    }
    Ok(())
}

/// `ln Tr(Mⁱ) = ln Σⱼ λⱼⁱ` for `i = 1..=i_max` (entry `i − 1` holds power `i`).
pub fn trace_powers(lambda: &[f64], i_max: usize) -> Result<Vec<LogScalar>> {
    check_psd(lambda)?;
    if i_max == 0 {
        return Err(Error::invalid("trace powers need i_max >= 1"));
    }
    let logs: Vec<f64> = lambda.iter().map(|l| l.ln()).collect();
    let mut buf = vec![0.0; logs.len()];
    Ok((1..=i_max)
        .map(|i| {
            for (b, l) in buf.iter_mut().zip(&logs) {
                *b = i as f64 * l;
            }
            LogScalar(log_sum_exp(&buf))
        })
        .collect())
}

/// Cached `S(0..=n_max)` for one diagonal PSD matrix, where
/// `S(k) = E[(xᵀMx)ᵏ] / (k! 2ᵏ)` for `x ~ N(0, I)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentTable {
    pub lambda: Vec<f64>,
    pub n_max: usize,
    pub log_s: Vec<LogScalar>,
    pub log_trace_pow: Vec<LogScalar>,
}

impl MomentTable {
    /// `ln E[(xᵀMx)ᵏ] = ln S(k) + ln k! + k ln 2`.
    pub fn log_gaussian_moment(&self, k: usize) -> LogScalar {
        self.log_s[k] * LogScalar(ln_gamma(k as f64 + 1.0) + k as f64 * std::f64::consts::LN_2)
    }
}

/// Builds `S(0..=n_max)` with the recursion
/// `S(0) = 1`, `S(n) = (1 / 2n) Σ_{i=1}^{n} Tr(Mⁱ) S(n − i)`,
/// evaluated bottom-up with log-sum-exp accumulation (`O(n_max²)` terms).
pub fn gaussian_qf_moments(lambda: &[f64], n_max: usize) -> Result<MomentTable> {
    check_psd(lambda)?;
    let log_trace_pow = if n_max > 0 { trace_powers(lambda, n_max)? } else { Vec::new() };
    let mut log_s: Vec<f64> = Vec::with_capacity(n_max + 1);
    log_s.push(0.0);
    let mut buf = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        buf.clear();
        buf.extend((1..=n).map(|i| log_trace_pow[i - 1].ln() + log_s[n - i]));
        log_s.push(log_sum_exp(&buf) - (2.0 * n as f64).ln());
    }
    Ok(MomentTable { lambda: lambda.to_vec(), n_max, log_s: log_s.into_iter().map(LogScalar).collect(), log_trace_pow })
}

/// `ln E[‖x‖^{2n}] = ln Π_{i<n} (d + 2i)` for `x ~ N(0, I_d)`.
pub fn gaussian_norm_moment_log(d: usize, n: usize) -> LogScalar {
    let d = d as f64;
    LogScalar((0..n).map(|i| (d + 2.0 * i as f64).ln()).sum())
}

/// `ln E[(yᵀMy)ᵏ]` for `y` uniform on the sphere `S^{m−1}`, `m = lambda.len()`.
///
/// Uses the Gaussian moment divided by the norm moment (norm and direction of a
/// standard Gaussian are independent). `m = 1` is the two-point sphere, where the
/// expectation is `λ₁ᵏ`.
pub fn sphere_qf_expectation_log(lambda: &[f64], k: usize) -> Result<LogScalar> {
    check_psd(lambda)?;
    if k == 0 {
        return Ok(LogScalar::ONE);
    }
    if lambda.len() == 1 {
        return Ok(LogScalar(k as f64 * lambda[0].ln()));
    }
    let table = gaussian_qf_moments(lambda, k)?;
    Ok(table.log_gaussian_moment(k) / gaussian_norm_moment_log(lambda.len(), k))
}

const RESCALE_BELOW: f64 = 1e-200;
const RESCALE_FACTOR: f64 = 1e200;

/// `ln E[(yᵀMy)ᵏ]` on `S^{m−1}` for every `k = 0..=n_max` in `O(n_max · m)`.
///
/// Same recursion as [`gaussian_qf_moments`], reorganized: because
/// `Tr(Mⁱ) = Σⱼ λⱼⁱ`, the convolution `Σᵢ Tr(Mⁱ) S(k − i)` splits into one
/// geometric convolution per eigenvalue, `Gⱼ(k) = λⱼ (S(k − 1) + Gⱼ(k − 1))`.
/// The state is carried relative to the norm moment and to `λ_max`, which
/// keeps it within a polynomial range; a running log scale guards the rest.
pub fn sphere_qf_expectations_log(lambda: &[f64], n_max: usize) -> Result<Vec<LogScalar>> {
    check_psd(lambda)?;
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(LogScalar::ONE);
    if n_max == 0 {
        return Ok(out);
    }
    let lmax = lambda.iter().copied().fold(0.0, f64::max);
    if lmax == 0.0 {
        out.resize(n_max + 1, LogScalar::ZERO);
        return Ok(out);
    }
    let ln_lmax = lmax.ln();
    if lambda.len() == 1 {
        out.extend((1..=n_max).map(|k| LogScalar(k as f64 * ln_lmax)));
        return Ok(out);
    }

    let ln_rescale = RESCALE_FACTOR.ln();

    let m = lambda.len() as f64;
    let scaled: Vec<f64> = lambda.iter().map(|l| l / lmax).collect();
    // g[j] = Gⱼ(k) / C(k − 1), r = S(k) / C(k), with C(k) the norm-moment ratio
    let mut g = vec![0.0; lambda.len()];
    let mut r = 1.0;
    let mut log_scale = 0.0;
    for k in 1..=n_max {
        let kf = k as f64;
        let carry = if k == 1 { 0.0 } else { (kf - 1.0) / (0.5 * m + kf - 2.0) };
        let mut sum = 0.0;
        for (gj, &lj) in g.iter_mut().zip(&scaled) {
            *gj = lj * (r + *gj * carry);
            sum += *gj;
        }
        r = sum / (m + 2.0 * kf - 2.0);
        out.push(LogScalar(kf * ln_lmax + r.ln() + log_scale));
        if r < RESCALE_BELOW {
            r *= RESCALE_FACTOR;
            g.iter_mut().for_each(|v| *v *= RESCALE_FACTOR);
            log_scale -= ln_rescale;
        }
    }
    Ok(out)
}

/// Consecutive ratios `E[(yᵀMy)ᵏ] / E[(yᵀMy)ᵏ⁻¹]` on `S^{m−1}` for
/// `k = 1..=n_max`; entry `0` is `1`. Same recursion as
/// [`sphere_qf_expectations_log`] without leaving the linear domain.
pub fn sphere_qf_step_ratios(lambda: &[f64], n_max: usize) -> Result<Vec<f64>> {
    check_psd(lambda)?;
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(1.0);
    let lmax = lambda.iter().copied().fold(0.0, f64::max);
    if lmax == 0.0 || lambda.len() == 1 {
        out.resize(n_max + 1, lmax);
        return Ok(out);
    }
    let m = lambda.len() as f64;
    let scaled: Vec<f64> = lambda.iter().map(|l| l / lmax).collect();
    // same scaled state as the log route; only the ratio leaves the loop
    let mut g = vec![0.0; lambda.len()];
    let mut r = 1.0;
    for k in 1..=n_max {
        let kf = k as f64;
        let carry = if k == 1 { 0.0 } else { (kf - 1.0) / (0.5 * m + kf - 2.0) };
        let mut sum = 0.0;
        for (gj, &lj) in g.iter_mut().zip(&scaled) {
            *gj = lj * (r + *gj * carry);
            sum += *gj;
        }
        let next = sum * (1.0 / (m + 2.0 * kf - 2.0));
        out.push(lmax * (next / r));
        r = next;
        if r < RESCALE_BELOW {
            r *= RESCALE_FACTOR;
            g.iter_mut().for_each(|v| *v *= RESCALE_FACTOR);
        }
    }
    Ok(out)
}

/// `ln |S^{d−1}| = ln(2 π^{d/2} / Γ(d/2))`.
pub fn log_sphere_surface(d: usize) -> f64 {
    assert!(d >= 1, "sphere dimension must be at least 1");
    let h = d as f64 / 2.0;
    std::f64::consts::LN_2 + h * PI.ln() - ln_gamma(h)
}
