//! One-coordinate marginal of the polynomial proposal `q(z) ∝ (zᵀ B z)ⁿ` on the
//! sphere `S^{m−1}`, with `B = diag(a_head, λ_rest)`.
//!
//! Writing `z = (t, √(1−t²) y)` with `y` uniform on `S^{m−2}`, the marginal
//! density of `t` is
//!
//! ```text
//! f(t) ∝ (1 − t²)^α · Σ_k C(n,k) a_headⁿ⁻ᵏ t^{2(n−k)} (1 − t²)ᵏ · E_y[(yᵀ diag(λ_rest) y)ᵏ]
//! ```
//!
//! with co-area exponent `α = (m − 3)/2`. Substituting `v = u²` turns each term's
//! integral over `[0, s]` into `½ B(aₖ, bₖ) I_{s²}(aₖ, bₖ)` with
//! `aₖ = n − k + ½` and `bₖ = k + α + 1`, so the CDF is a nonnegative mixture of
//! regularized incomplete beta functions. Consecutive terms share `aₖ + bₖ`, and
//! `I_x(aₖ, bₖ) = I_x(aₖ₋₁, bₖ₋₁) + x^{aₖ}(1−x)^{bₖ−1} / (aₖ B(aₖ, bₖ))`, which
//! lets one continued fraction plus positive increments evaluate every term.

use crate::error::{Error, Result};
use crate::moments::sphere_qf_step_ratios;
use crate::special::{ln_beta, log_sum_exp, reg_incomplete_beta_prepared};

pub use crate::special::{ln_beta as log_beta, reg_incomplete_beta};

pub const DEFAULT_CDF_TOLERANCE: f64 = 1e-13;

/// Terms this far (in nats) below the total mass are dropped.
const DROP_BELOW_TOTAL: f64 = -60.0;
/// Increments below `exp(-45)` are skipped during evaluation.
const SKIP_INCREMENT: f64 = -45.0;
const RESCALE_ABOVE: f64 = 1e200;
const MIN_BRACKET_WIDTH: f64 = 1e-15;
const MAX_INVERT_ITER: usize = 200;

/// One expansion term: `exp(log_weight) · I_{t²}(a, b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginalTerm {
    pub log_weight: f64,
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone)]
pub struct MarginalCdf {
    n: usize,
    m: usize,
    alpha: f64,
    terms: Vec<MarginalTerm>,
    log_total: f64,
    // terms outside lo..=hi carry no mass at double precision
    lo: usize,
    hi: usize,
    ln_beta_first: f64,
    // ln(Σ_{j≥k} cⱼ) − ln(aₖ B(aₖ, bₖ)) for lo < k ≤ hi, indexed by k − lo
    log_increment: Vec<f64>,
    // ln cₖ − ln B(aₖ, bₖ) for lo ≤ k ≤ hi, indexed by k − lo
    log_density: Vec<f64>,
    ln_beta_last: f64,
    // ln(Σ_{j<k} cⱼ) − ln(aₖ B(aₖ, bₖ)), the same increments seen from the upper tail
    log_increment_upper: Vec<f64>,
}

impl MarginalCdf {
    /// Builds the marginal for exponent `n` on `S^{m−1}`.
    ///
    /// `a_head` is the first diagonal entry of `B`, `lambda_rest` the remaining
    /// `m − 1` entries.
    pub fn build(a_head: f64, lambda_rest: &[f64], n: usize, m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::invalid(format!("marginal needs sphere dimension m >= 2, got {m}")));
        }
        if lambda_rest.len() != m - 1 {
            return Err(Error::DimensionMismatch { expected: m - 1, found: lambda_rest.len() });
        }
        if !(a_head > 0.0) || !a_head.is_finite() {
            return Err(Error::invalid(format!("a_head must be positive, got {a_head}")));
        }
        if let Some(bad) = lambda_rest.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
            return Err(Error::invalid(format!("lambda_rest must be positive, got {bad}")));
        }

        let alpha = (m as f64 - 3.0) / 2.0;
        let nf = n as f64;
        let a_of = |k: usize| nf - k as f64 + 0.5;
        let b_of = |k: usize| k as f64 + alpha + 1.0;

        let ratios = sphere_qf_step_ratios(lambda_rest, n)?;
        let inv_head = 1.0 / a_head;

        // Weights relative to k = 0, carried as mantissa and log offset:
        // wₖ / wₖ₋₁ = (n−k+1)/k · bₖ₋₁/aₖ · Eₖ/Eₖ₋₁ / a_head.
        let mut mantissa = Vec::with_capacity(n + 1);
        let mut offset = Vec::with_capacity(n + 1);
        let (mut v, mut off) = (1.0f64, 0.0f64);
        let (mut peak_v, mut peak_off) = (1.0f64, 0.0f64);
        for k in 0..=n {
            if k > 0 {
                let kf = k as f64;
                v *= (nf - kf + 1.0) * b_of(k - 1) / (kf * a_of(k)) * ratios[k] * inv_head;
                if v > RESCALE_ABOVE {
                    v /= RESCALE_ABOVE;
                    off += RESCALE_ABOVE.ln();
                } else if v > 0.0 && v < 1.0 / RESCALE_ABOVE {
                    v *= RESCALE_ABOVE;
                    off -= RESCALE_ABOVE.ln();
                }
                let higher = if off == peak_off { v > peak_v } else { v.ln() + off > peak_v.ln() + peak_off };
                if higher {
                    (peak_v, peak_off) = (v, off);
                }
            }
            mantissa.push(v);
            offset.push(off);
        }
        let peak = peak_v.ln() + peak_off;
        if !peak.is_finite() {
            return Err(Error::invalid("marginal has no finite mass"));
        }
        let mut threshold = (f64::NAN, 0.0);
        let mut active = |k: usize| {
            if threshold.0 != offset[k] {
                threshold = (offset[k], (peak + DROP_BELOW_TOTAL - offset[k]).exp());
            }
            mantissa[k] >= threshold.1
        };
        let lo = (0..=n).find(|&k| active(k)).unwrap_or(0);
        let hi = (lo..=n).rev().find(|&k| active(k)).unwrap_or(n);

        let base = ln_beta(a_of(0), b_of(0))? - std::f64::consts::LN_2 + nf * a_head.ln();
        let log_weights: Vec<f64> = (lo..=hi).map(|k| base + mantissa[k].ln() + offset[k]).collect();
        let window = &log_weights[..];
        let log_total = log_sum_exp(window);

        let mut mass: Vec<f64> = window
            .iter()
            .map(|w| {
                let rel = w - log_total;
                if rel < DROP_BELOW_TOTAL {
                    0.0
                } else {
                    rel.exp()
                }
            })
            .collect();
        let total: f64 = mass.iter().sum();
        mass.iter_mut().for_each(|c| *c /= total);

        let len = hi - lo + 1;
        let mut tail = vec![0.0; len + 1];
        for i in (0..len).rev() {
            tail[i] = tail[i + 1] + mass[i];
        }
        let mut head = vec![0.0; len + 1];
        for i in 0..len {
            head[i + 1] = head[i] + mass[i];
        }

        let ln_beta_first = ln_beta(a_of(lo), b_of(lo))?;
        let mut log_increment = Vec::with_capacity(len);
        let mut log_density = Vec::with_capacity(len);
        let mut log_increment_upper = Vec::with_capacity(len);
        let mut ln_beta_k = ln_beta_first;
        for i in 0..len {
            let k = lo + i;
            if i > 0 {
                ln_beta_k += (b_of(k - 1) / a_of(k)).ln();
            }
            log_increment.push(if i == 0 { f64::NEG_INFINITY } else { tail[i].ln() - a_of(k).ln() - ln_beta_k });
            log_increment_upper.push(if i == 0 { f64::NEG_INFINITY } else { head[i].ln() - a_of(k).ln() - ln_beta_k });
            log_density.push(mass[i].ln() - ln_beta_k);
        }

        let terms = log_weights
            .iter()
            .enumerate()
            .map(|(i, &log_weight)| MarginalTerm { log_weight, a: a_of(lo + i), b: b_of(lo + i) })
            .collect();

        Ok(Self {
            n,
            m,
            alpha,
            terms,
            log_total,
            lo,
            hi,
            ln_beta_first,
            log_increment,
            log_density,
            ln_beta_last: ln_beta(a_of(hi), b_of(hi))?,
            log_increment_upper,
        })
    }

    pub fn exponent(&self) -> usize {
        self.n
    }

    pub fn sphere_dim(&self) -> usize {
        self.m
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Expansion terms that carry mass, starting at index `window().0`.
    pub fn terms(&self) -> &[MarginalTerm] {
        &self.terms
    }

    /// Inclusive range of expansion indices `k` kept after dropping negligible weights.
    pub fn window(&self) -> (usize, usize) {
        (self.lo, self.hi)
    }

    /// `ln H(1)`, the unnormalized mass of the half interval `[0, 1]`.
    pub fn log_total(&self) -> f64 {
        self.log_total
    }

    /// Normalized CDF `G(t)` on `[−1, 1]`.
    pub fn cdf(&self, t: f64) -> Result<f64> {
        if !(-1.0..=1.0).contains(&t) {
            return Err(Error::invalid(format!("cdf argument {t} outside [-1, 1]")));
        }
        if t == 0.0 {
            return Ok(0.5);
        }
        let (h, _) = self.half_mass(t.abs(), false)?;
        if h <= 0.5 {
            return Ok(if t > 0.0 { 0.5 + 0.5 * h } else { 0.5 - 0.5 * h });
        }
        // far from the center the complement is evaluated directly, so tails keep
        // their relative accuracy and 1 − h never cancels
        let (u, _) = self.upper_mass(t.abs(), false)?;
        Ok(if t > 0.0 { 1.0 - 0.5 * u } else { 0.5 * u })
    }

    /// Normalized density `G'(t)` on `(−1, 1)`.
    pub fn density(&self, t: f64) -> Result<f64> {
        if !(-1.0 < t && t < 1.0) {
            return Err(Error::invalid(format!("density argument {t} outside (-1, 1)")));
        }
        let (_, dh) = self.half_mass(t.abs(), true)?;
        Ok(0.5 * dh)
    }

    pub fn invert(&self, r: f64) -> Result<f64> {
        self.invert_with_tolerance(r, DEFAULT_CDF_TOLERANCE)
    }

    /// Solves `G(t) = r` for `r ∈ (0, 1)`.
    ///
    /// By evenness the search runs over `s = |t| ∈ [0, 1]` for the half-mass
    /// `2|r − ½|`, or for its complement `2 min(r, 1 − r)` in the outer tails. Newton steps are taken inside a shrinking bracket, with a
    /// forced bisection whenever the bracket fails to halve; iteration stops when
    /// `|G − r| ≤ tolerance`, the bracket is narrower than `1e-15`, or after 200
    /// steps.
    pub fn invert_with_tolerance(&self, r: f64, tolerance: f64) -> Result<f64> {
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::invalid(format!("cdf inversion needs r in (0, 1), got {r}")));
        }
        if r == 0.5 {
            return Ok(0.0);
        }
        let target = (2.0 * r - 1.0).abs();
        // mass beyond |t| on both sides, exact in floating point unlike 1 − target
        let beyond = 2.0 * r.min(1.0 - r);
        let use_upper = beyond < 0.5;
        let sign = if r > 0.5 { 1.0 } else { -1.0 };
        let half_tol = 2.0 * tolerance;

        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        let mut s = target;
        let mut width_before = hi - lo;
        for iter in 0..MAX_INVERT_ITER {
            let (f, dh) = if use_upper {
                let (u, dh) = self.upper_mass(s, true)?;
                (beyond - u, dh)
            } else {
                let (h, dh) = self.half_mass(s, true)?;
                (h - target, dh)
            };
            if !f.is_finite() {
                return Err(Error::NoConvergence("marginal CDF inversion"));
            }
            if f.abs() <= half_tol {
                return Ok(sign * s);
            }
            if f < 0.0 {
                lo = lo.max(s);
            } else {
                hi = hi.min(s);
            }
            if hi - lo <= MIN_BRACKET_WIDTH {
                return Ok(sign * 0.5 * (lo + hi));
            }
            let newton = s - f / dh;
            let halved = hi - lo <= 0.5 * width_before;
            s = if dh > 0.0 && newton > lo && newton < hi && (iter % 4 != 3 || halved) {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if iter % 4 == 3 {
                width_before = hi - lo;
            }
        }
        Err(Error::NoConvergence("marginal CDF inversion"))
    }

    /// Returns `H(s) / H(1)` for `s ∈ [0, 1]` and, when requested, its derivative.
    fn half_mass(&self, s: f64, with_density: bool) -> Result<(f64, f64)> {
        if s <= 0.0 {
            return Ok((0.0, if with_density { self.density_at_zero() } else { 0.0 }));
        }
        if s >= 1.0 {
            return Ok((1.0, f64::INFINITY));
        }
        let x = s * s;
        let one_minus_x = (1.0 - s) * (1.0 + s);
        let lx = x.ln();
        let l1x = one_minus_x.ln();

        let first = self.terms[0];
        let mut h = 0.0;
        if self.first_term_matters(x, lx, l1x) {
            h = reg_incomplete_beta_prepared(x, one_minus_x, first.a, first.b, self.ln_beta_first)?;
        }

        let mut dens = 0.0;
        for (i, term) in self.terms.iter().enumerate() {
            let a = term.a;
            let bm1 = term.b - 1.0;
            if i > 0 {
                let e = a * lx + bm1 * l1x + self.log_increment[i];
                if e > SKIP_INCREMENT {
                    h += e.exp();
                }
            }
            if with_density {
                let e = (a - 1.0) * lx + bm1 * l1x + self.log_density[i];
                if e > SKIP_INCREMENT {
                    dens += e.exp();
                }
            }
        }
        Ok((h.min(1.0), 2.0 * s * dens))
    }

    /// Returns `1 − H(s) / H(1)` without cancellation and, when requested, the
    /// derivative of `H(s) / H(1)`.
    ///
    /// Starts from `1 − I_x(a_hi, b_hi)` and adds the same increments as
    /// [`Self::half_mass`], each weighted by the mass of the terms below it.
    fn upper_mass(&self, s: f64, with_density: bool) -> Result<(f64, f64)> {
        if s <= 0.0 {
            return Ok((1.0, if with_density { self.density_at_zero() } else { 0.0 }));
        }
        if s >= 1.0 {
            return Ok((0.0, f64::INFINITY));
        }
        let x = s * s;
        let one_minus_x = (1.0 - s) * (1.0 + s);
        let lx = x.ln();
        let l1x = one_minus_x.ln();

        let last = self.terms[self.terms.len() - 1];
        let mut u = reg_incomplete_beta_prepared(one_minus_x, x, last.b, last.a, self.ln_beta_last)?;
        let increment =
            |i: usize, term: &MarginalTerm| term.a * lx + (term.b - 1.0) * l1x + self.log_increment_upper[i];
        // the tail may itself be far below exp(SKIP_INCREMENT), so the cutoff is
        // taken relative to the largest contribution
        let peak = self.terms.iter().enumerate().skip(1).map(|(i, t)| increment(i, t)).fold(u.ln(), f64::max);
        let cutoff = peak + SKIP_INCREMENT;
        let mut dens = 0.0;
        for (i, term) in self.terms.iter().enumerate() {
            let bm1 = term.b - 1.0;
            if i > 0 {
                let e = increment(i, term);
                if e > cutoff {
                    u += e.exp();
                }
            }
            if with_density {
                let e = (term.a - 1.0) * lx + bm1 * l1x + self.log_density[i];
                if e > SKIP_INCREMENT {
                    dens += e.exp();
                }
            }
        }
        Ok((u.min(1.0), 2.0 * s * dens))
    }

    /// Upper bound on `I_x(a₀, b₀)` from its hypergeometric series; skips the
    /// continued fraction when the term cannot contribute.
    fn first_term_matters(&self, x: f64, lx: f64, l1x: f64) -> bool {
        let a = self.terms[0].a;
        let b = self.terms[0].b;
        if x > (a + 1.0) / (a + b + 2.0) {
            return true;
        }
        let ratio = x * ((a + b) / (a + 1.0)).max(1.0);
        let bound = a * lx + b * l1x - self.ln_beta_first - a.ln() - (1.0 - ratio).ln();
        bound > SKIP_INCREMENT
    }

    fn density_at_zero(&self) -> f64 {
        // only the k = n term survives: 2s · x^{−1/2} → 2
        if self.hi == self.n {
            2.0 * self.log_density[self.hi - self.lo].exp()
        } else {
            0.0
        }
    }
}

/// Free-function form of [`MarginalCdf::build`].
pub fn build_marginal(a_head: f64, lambda_rest: &[f64], n: usize, m: usize) -> Result<MarginalCdf> {
    MarginalCdf::build(a_head, lambda_rest, n, m)
}

pub fn cdf_eval(marginal: &MarginalCdf, t: f64) -> Result<f64> {
    marginal.cdf(t)
}

pub fn invert_cdf(marginal: &MarginalCdf, r: f64) -> Result<f64> {
    marginal.invert(r)
}
