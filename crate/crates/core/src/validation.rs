//! Quadrature oracles, goodness-of-fit statistics and the validation suites
//! behind `bingham validate`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::cdf::MarginalCdf;
use crate::error::{Error, Result};
use crate::linalg::{dot, quadratic_form, DenseMatrix, SymmetricMatrix};
use crate::moments::{gaussian_qf_moments, sphere_qf_expectations_log};
use crate::posterior::{generate_synthetic, mmse_estimate, posterior_sample, Observation};
use crate::sampler::{log_accept_ratio, proposal_exponent, BinghamSampler, SamplerConfig};

/// Points in the azimuthal trapezoid rule used by the `d = 3` oracle.
const AZIMUTH_POINTS: usize = 256;
/// Asymptotic Kolmogorov critical value at the 1% level, times `√N`.
pub const KS_CRITICAL_1PCT: f64 = 1.63;

/// Tabulated CDF of one coordinate, linearly interpolated between grid points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleCdf {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub built_for: String,
}

impl OracleCdf {
    pub fn eval(&self, t: f64) -> f64 {
        if t <= self.grid[0] {
            return 0.0;
        }
        let last = self.grid.len() - 1;
        if t >= self.grid[last] {
            return 1.0;
        }
        let i = self.grid.partition_point(|g| *g <= t).max(1) - 1;
        let (g0, g1) = (self.grid[i], self.grid[i + 1]);
        let w = (t - g0) / (g1 - g0);
        self.values[i] + w * (self.values[i + 1] - self.values[i])
    }

    /// Generalized inverse of the interpolant.
    pub fn inverse(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        let i = self.values.partition_point(|v| *v < u);
        if i == 0 {
            return self.grid[0];
        }
        if i >= self.values.len() {
            return self.grid[self.grid.len() - 1];
        }
        let (v0, v1) = (self.values[i - 1], self.values[i]);
        let w = if v1 > v0 { (u - v0) / (v1 - v0) } else { 1.0 };
        self.grid[i - 1] + w * (self.grid[i] - self.grid[i - 1])
    }
}

/// Marginal CDF of coordinate `coord` under `p(x) ∝ exp(xᵀAx)` on `S¹` or `S²`.
///
/// The sphere is parameterized by the angle `φ` to the chosen axis, so the
/// coordinate is `cos φ`. The density in `φ` (both branches for `d = 2`, the
/// azimuthal integral times `sin φ` for `d = 3`) is accumulated with composite
/// Simpson over `grid_size` intervals.
pub fn oracle_marginal_cdf(a: &SymmetricMatrix, coord: usize, grid_size: usize) -> Result<OracleCdf> {
    let built_for = format!("exp(x'Ax), A = {:?}, coordinate {coord}", a.rows());
    let a = a.clone();
    oracle_marginal_cdf_from_log_density(a.dim(), coord, grid_size, built_for, move |x| {
        quadratic_form(&a, x).expect("oracle point matches matrix dimension")
    })
}

/// As [`oracle_marginal_cdf`] for an arbitrary unnormalized log-density on the sphere.
pub fn oracle_marginal_cdf_from_log_density<F>(
    dim: usize,
    coord: usize,
    grid_size: usize,
    built_for: String,
    log_density: F,
) -> Result<OracleCdf>
where
    F: Fn(&[f64]) -> f64,
{
    if !(dim == 2 || dim == 3) {
        return Err(Error::invalid(format!("quadrature oracle supports d = 2 or 3, got {dim}")));
    }
    if coord >= dim {
        return Err(Error::invalid(format!("coordinate {coord} out of range for d = {dim}")));
    }
    if grid_size < 2 {
        return Err(Error::invalid("oracle grid needs at least 2 intervals"));
    }
    let intervals = grid_size + grid_size % 2;
    let h = std::f64::consts::PI / intervals as f64;
    let others: Vec<usize> = (0..dim).filter(|&i| i != coord).collect();

    // log of the φ-density at every node, before normalization
    let mut point = vec![0.0; dim];
    let mut log_g = Vec::with_capacity(intervals + 1);
    let mut branch = Vec::with_capacity(AZIMUTH_POINTS);
    for j in 0..=intervals {
        let phi = j as f64 * h;
        let (s, c) = phi.sin_cos();
        point[coord] = c;
        branch.clear();
        if dim == 2 {
            for sign in [1.0, -1.0] {
                point[others[0]] = sign * s;
                branch.push(log_density(&point));
            }
        } else {
            for k in 0..AZIMUTH_POINTS {
                let psi = 2.0 * std::f64::consts::PI * k as f64 / AZIMUTH_POINTS as f64;
                let (sp, cp) = psi.sin_cos();
                point[others[0]] = s * cp;
                point[others[1]] = s * sp;
                branch.push(log_density(&point));
            }
        }
        let peak = branch.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mean = branch.iter().map(|v| (v - peak).exp()).sum::<f64>() / branch.len() as f64;
        let jacobian = if dim == 3 { s.ln() } else { 0.0 };
        log_g.push(peak + mean.ln() + jacobian);
    }
    let peak = log_g.iter().copied().filter(|v| v.is_finite()).fold(f64::NEG_INFINITY, f64::max);
    if !peak.is_finite() {
        return Err(Error::invalid("oracle density is not finite"));
    }
    let g: Vec<f64> = log_g.iter().map(|v| (v - peak).exp()).collect();

    // tail[j] = ∫_{φⱼ}^{π} g
    let mut tail = vec![0.0; intervals + 1];
    let mut j = intervals;
    while j >= 2 {
        let (g0, g1, g2) = (g[j - 2], g[j - 1], g[j]);
        tail[j - 1] = tail[j] + h / 12.0 * (-g0 + 8.0 * g1 + 5.0 * g2);
        tail[j - 2] = tail[j] + h / 3.0 * (g0 + 4.0 * g1 + g2);
        j -= 2;
    }
    let total = tail[0];
    let mut grid = Vec::with_capacity(intervals + 1);
    let mut values = Vec::with_capacity(intervals + 1);
    for j in (0..=intervals).rev() {
        grid.push((j as f64 * h).cos());
        values.push((tail[j] / total).clamp(0.0, 1.0));
    }
    grid[0] = -1.0;
    grid[intervals] = 1.0;
    values[0] = 0.0;
    values[intervals] = 1.0;
    // Simpson half-steps can dip by rounding; keep the table monotone
    for i in 1..values.len() {
        values[i] = values[i].max(values[i - 1]);
    }
    Ok(OracleCdf { grid, values, built_for })
}

/// Kolmogorov–Smirnov distance between the empirical CDF of `samples` and `oracle`.
pub fn ks_statistic(samples: &[f64], oracle: &OracleCdf) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::invalid("KS statistic needs at least one sample"));
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("KS samples must be finite"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut worst = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = oracle.eval(x);
        worst = worst.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    Ok(worst)
}

pub fn ks_critical_1pct(n: usize) -> f64 {
    KS_CRITICAL_1PCT / (n as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AcceptanceCheck {
    pub proposals: u64,
    pub accepted: u64,
    pub rate: f64,
    pub lower: f64,
    pub upper: f64,
    pub pass: bool,
}

/// Runs `proposals` rejection rounds and checks the rate against
/// `[e⁻¹ − 3σ̂, e^{−1/2} + 3σ̂]`. The zero-gap shortcut is not used here.
pub fn acceptance_rate_check(a: &SymmetricMatrix, proposals: u64, cfg: &SamplerConfig) -> Result<AcceptanceCheck> {
    if proposals < 1000 {
        return Err(Error::invalid("acceptance check needs at least 1000 proposals"));
    }
    cfg.validate()?;
    let sampler = BinghamSampler::new(a)?;
    let accepted = sampler.count_acceptances(proposals, cfg.seed, cfg.cdf_tolerance)?;
    let rate = accepted as f64 / proposals as f64;
    let se = (rate * (1.0 - rate) / proposals as f64).sqrt();
    let lower = (-1.0f64).exp() - 3.0 * se;
    let upper = (-0.5f64).exp() + 3.0 * se;
    Ok(AcceptanceCheck { proposals, accepted, rate, lower, upper, pass: rate >= lower && rate <= upper })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioReport {
    pub sigma_sq: f64,
    pub best_ratio: f64,
    pub best_omega: f64,
}

/// Log-spaced `ω` values `10^(i/per_decade)` for `|i| ≤ decades · per_decade`; contains `1`.
pub fn default_omega_grid(decades: u32, per_decade: u32) -> Vec<f64> {
    let span = (decades * per_decade) as i64;
    (-span..=span).map(|i| 10f64.powf(i as f64 / per_decade as f64)).collect()
}

/// Best worst-case density ratio between the circular Bingham density
/// `q(θ) ∝ exp(σ² cos²θ)` and angular Gaussians `p(θ) ∝ (cos²θ + ω sin²θ)⁻¹`.
///
/// Both densities are normalized on a 1000-point θ grid; for each `ω` the worst
/// `max{p/q, q/p}` over the grid is taken, and the smallest over `omega_grid` is
/// reported.
pub fn angular_gaussian_worst_ratio(sigma_sq: f64, omega_grid: &[f64]) -> Result<RatioReport> {
    const POINTS: usize = 1000;
    if omega_grid.is_empty() {
        return Err(Error::invalid("omega grid is empty"));
    }
    if let Some(w) = omega_grid.iter().find(|w| !(**w > 0.0) || !w.is_finite()) {
        return Err(Error::invalid(format!("omega values must be positive, got {w}")));
    }
    if !sigma_sq.is_finite() {
        return Err(Error::invalid("sigma_sq must be finite"));
    }
    let angles: Vec<(f64, f64)> = (0..POINTS)
        .map(|i| {
            let th = 2.0 * std::f64::consts::PI * i as f64 / POINTS as f64;
            let c = th.cos();
            (c * c, 1.0 - c * c)
        })
        .collect();
    let normalize = |logs: Vec<f64>| {
        let peak = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mean = logs.iter().map(|v| (v - peak).exp()).sum::<f64>() / logs.len() as f64;
        let shift = peak + mean.ln();
        logs.into_iter().map(|v| v - shift).collect::<Vec<_>>()
    };
    let log_q = normalize(angles.iter().map(|(c2, _)| sigma_sq * c2).collect());
    let mut best = RatioReport { sigma_sq, best_ratio: f64::INFINITY, best_omega: f64::NAN };
    for &omega in omega_grid {
        let log_p = normalize(angles.iter().map(|(c2, s2)| -(c2 + omega * s2).ln()).collect());
        let worst = log_p.iter().zip(&log_q).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        let ratio = worst.exp();
        if ratio < best.best_ratio {
            best.best_ratio = ratio;
            best.best_omega = omega;
        }
    }
    Ok(best)
}

/// Haar-random orthogonal matrix from Gram–Schmidt on a Gaussian matrix.
pub fn random_orthogonal<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DenseMatrix {
    loop {
        let mut cols: Vec<Vec<f64>> =
            (0..dim).map(|_| (0..dim).map(|_| rng.sample(StandardNormal)).collect()).collect();
        let mut ok = true;
        for i in 0..dim {
            for j in 0..i {
                let p = dot(&cols[i], &cols[j]);
                let (head, tail) = cols.split_at_mut(i);
                tail[0].iter_mut().zip(&head[j]).for_each(|(v, u)| *v -= p * u);
            }
            let norm = dot(&cols[i], &cols[i]).sqrt();
            if norm < 1e-8 {
                ok = false;
                break;
            }
            cols[i].iter_mut().for_each(|v| *v /= norm);
        }
        if ok {
            let mut data = vec![0.0; dim * dim];
            for (j, col) in cols.iter().enumerate() {
                for (i, v) in col.iter().enumerate() {
                    data[i * dim + j] = *v;
                }
            }
            return DenseMatrix::from_row_major(dim, data).expect("square by construction");
        }
    }
}

/// Random symmetric matrix with spectral gap exactly `gap` (up to rounding), a
/// random basis, and a random offset.
pub fn random_symmetric_with_gap<R: Rng + ?Sized>(dim: usize, gap: f64, rng: &mut R) -> SymmetricMatrix {
    let offset = rng.random_range(-3.0..3.0);
    let mut values: Vec<f64> = (0..dim).map(|_| offset + gap * rng.random::<f64>()).collect();
    values[0] = offset;
    if dim > 1 {
        values[1] = offset + gap;
    }
    let basis = random_orthogonal(dim, rng);
    SymmetricMatrix::from_spectrum(&basis, &values).expect("finite spectrum")
}

/// One line of the validation report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationRecord {
    pub name: String,
    pub statistic: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl ValidationRecord {
    /// Passes when `statistic ≤ threshold`.
    fn at_most(name: impl Into<String>, statistic: f64, threshold: f64) -> Self {
        Self { name: name.into(), statistic, threshold, pass: statistic <= threshold }
    }

    /// Passes when `statistic > threshold`.
    fn above(name: impl Into<String>, statistic: f64, threshold: f64) -> Self {
        Self { name: name.into(), statistic, threshold, pass: statistic > threshold }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Moments,
    Cdf,
    Sampler,
    Posterior,
    Ratio,
    All,
}

impl Suite {
    pub const NAMES: [&'static str; 6] = ["moments", "cdf", "sampler", "posterior", "ratio", "all"];
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "moments" => Ok(Suite::Moments),
            "cdf" => Ok(Suite::Cdf),
            "sampler" => Ok(Suite::Sampler),
            "posterior" => Ok(Suite::Posterior),
            "ratio" => Ok(Suite::Ratio),
            "all" => Ok(Suite::All),
            other => {
                Err(Error::invalid(format!("unknown suite {other:?}; expected one of {}", Suite::NAMES.join(", "))))
            }
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Suite::Moments => "moments",
            Suite::Cdf => "cdf",
            Suite::Sampler => "sampler",
            Suite::Posterior => "posterior",
            Suite::Ratio => "ratio",
            Suite::All => "all",
        };
        f.write_str(name)
    }
}

/// Runs a suite. Sizes are chosen to finish in seconds; the integration tests
/// run the same checks at full scale.
pub fn run_suite(suite: Suite, seed: u64) -> Result<Vec<ValidationRecord>> {
    match suite {
        Suite::Moments => moments_suite(seed),
        Suite::Cdf => cdf_suite(seed),
        Suite::Sampler => sampler_suite(seed),
        Suite::Posterior => posterior_suite(seed),
        Suite::Ratio => ratio_suite(),
        Suite::All => {
            let mut all = Vec::new();
            for s in [Suite::Moments, Suite::Cdf, Suite::Sampler, Suite::Posterior, Suite::Ratio] {
                all.extend(run_suite(s, seed)?);
            }
            Ok(all)
        }
    }
}

fn relative_error(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }
}

fn moments_suite(seed: u64) -> Result<Vec<ValidationRecord>> {
    let mut rng = BinghamSampler::stream(seed, u64::MAX - 1);

    // S(n) for M = cI against cⁿ ∏(d + 2i) / (n! 2ⁿ), compared in the log domain
    let mut worst_scalar = 0.0f64;
    for d in 1..=10usize {
        for c in [0.25, 1.0, 3.0] {
            let table = gaussian_qf_moments(&vec![c; d], 50)?;
            let mut log_closed = 0.0f64;
            for n in 1..=50usize {
                log_closed += (c * (d as f64 + 2.0 * (n as f64 - 1.0)) / (2.0 * n as f64)).ln();
                worst_scalar = worst_scalar.max((table.log_s[n].ln() - log_closed).exp_m1().abs());
            }
        }
    }

    // E[(xᵀMx)²] = (Tr M)² + 2 Tr(M²)
    let mut worst_second = 0.0f64;
    for _ in 0..100 {
        let d = rng.random_range(1..=10);
        let lambda: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..5.0)).collect();
        let tr: f64 = lambda.iter().sum();
        let tr2: f64 = lambda.iter().map(|v| v * v).sum();
        let table = gaussian_qf_moments(&lambda, 2)?;
        worst_second = worst_second.max(relative_error(table.log_gaussian_moment(2).value(), tr * tr + 2.0 * tr2));
    }

    // the O(n·m) sphere route against the direct recursion
    let mut worst_route = 0.0f64;
    for _ in 0..20 {
        let d = rng.random_range(2..=8);
        let lambda: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..4.0)).collect();
        let fast = sphere_qf_expectations_log(&lambda, 120)?;
        let slow = gaussian_qf_moments(&lambda, 120)?;
        let norm = crate::moments::gaussian_norm_moment_log;
        for k in 0..=120 {
            let direct = slow.log_gaussian_moment(k) / norm(d, k);
            worst_route = worst_route.max((fast[k].ln() - direct.ln()).abs());
        }
    }

    Ok(vec![
        ValidationRecord::at_most("moments/scaled_identity_closed_form", worst_scalar, 1e-12),
        ValidationRecord::at_most("moments/second_moment_trace_identity", worst_second, 1e-12),
        ValidationRecord::at_most("moments/sphere_route_agreement", worst_route, 1e-10),
    ])
}

fn cdf_suite(seed: u64) -> Result<Vec<ValidationRecord>> {
    let mut rng = BinghamSampler::stream(seed, u64::MAX - 2);
    let mut records = Vec::new();

    let uniform = MarginalCdf::build(1.0, &[1.0, 1.0], 5, 3)?;
    let arcsine = MarginalCdf::build(1.0, &[1.0], 5, 2)?;
    let (mut worst_uniform, mut worst_arcsine) = (0.0f64, 0.0f64);
    for i in 0..=200 {
        let t = -1.0 + i as f64 / 100.0;
        worst_uniform = worst_uniform.max((uniform.cdf(t)? - 0.5 * (t + 1.0)).abs());
        let exact = 0.5 + t.asin() / std::f64::consts::PI;
        worst_arcsine = worst_arcsine.max((arcsine.cdf(t)? - exact).abs());
    }
    records.push(ValidationRecord::at_most("cdf/uniform_reduction_s2", worst_uniform, 1e-12));
    records.push(ValidationRecord::at_most("cdf/arcsine_reduction_s1", worst_arcsine, 1e-12));

    let mut worst_roundtrip = 0.0f64;
    let mut worst_oracle = 0.0f64;
    for _ in 0..10 {
        let m = rng.random_range(2..=3usize);
        let n = rng.random_range(1..=30usize);
        let diag: Vec<f64> = (0..m).map(|_| 1.0 + rng.random_range(0.0..3.0) / n as f64).collect();
        let marginal = MarginalCdf::build(diag[0], &diag[1..], n, m)?;
        for _ in 0..10 {
            let r: f64 = rng.random_range(0.001..0.999);
            let t = marginal.invert(r)?;
            worst_roundtrip = worst_roundtrip.max((marginal.cdf(t)? - r).abs());
        }
        let d2 = diag.clone();
        let oracle = oracle_marginal_cdf_from_log_density(m, 0, 20_000, String::new(), move |z| {
            n as f64 * z.iter().zip(&d2).map(|(v, l)| l * v * v).sum::<f64>().ln()
        })?;
        // compare at quadrature nodes, where the oracle carries no interpolation error
        for (t, v) in oracle.grid.iter().zip(&oracle.values).step_by(97) {
            worst_oracle = worst_oracle.max((marginal.cdf(*t)? - v).abs());
        }
    }
    records.push(ValidationRecord::at_most("cdf/inversion_roundtrip", worst_roundtrip, 1e-12));
    records.push(ValidationRecord::at_most("cdf/quadrature_agreement", worst_oracle, 1e-8));
    Ok(records)
}

fn ks_record(name: &str, a: &SymmetricMatrix, count: usize, seed: u64) -> Result<Vec<ValidationRecord>> {
    let batch = BinghamSampler::new(a)?.sample_batch(count, &SamplerConfig::with_seed(seed))?;
    let mut out = Vec::new();
    for coord in 0..a.dim() {
        let oracle = oracle_marginal_cdf(a, coord, 10_000)?;
        let xs: Vec<f64> = batch.samples.iter().map(|x| x[coord]).collect();
        out.push(ValidationRecord::at_most(
            format!("sampler/ks_{name}_coord{coord}"),
            ks_statistic(&xs, &oracle)?,
            ks_critical_1pct(count),
        ));
    }
    Ok(out)
}

fn sampler_suite(seed: u64) -> Result<Vec<ValidationRecord>> {
    let mut rng = BinghamSampler::stream(seed, u64::MAX - 3);
    let mut records = Vec::new();
    records.extend(ks_record("diag_0_4", &SymmetricMatrix::from_diagonal(&[0.0, 4.0])?, 20_000, seed)?);
    records.extend(ks_record("diag_0_2_5", &SymmetricMatrix::from_diagonal(&[0.0, 2.0, 5.0])?, 20_000, seed)?);

    for (d, gap) in [(2, 0.5), (5, 5.0), (10, 25.0)] {
        let a = random_symmetric_with_gap(d, gap, &mut rng);
        let check = acceptance_rate_check(&a, 2_000, &SamplerConfig::with_seed(seed))?;
        records.push(ValidationRecord {
            name: format!("sampler/acceptance_rate_d{d}_gap{gap}"),
            statistic: check.rate,
            threshold: check.lower,
            pass: check.pass,
        });
    }

    let mut worst = f64::NEG_INFINITY;
    let mut lowest = f64::INFINITY;
    for _ in 0..2_000 {
        let d = rng.random_range(2..=10usize);
        let gap = rng.random_range(0.0..30.0);
        let mut diag: Vec<f64> = (0..d).map(|_| gap * rng.random::<f64>()).collect();
        diag[0] = 0.0;
        diag[d - 1] = gap;
        let z = crate::sampler::uniform_on_sphere(d, &mut rng);
        let v = log_accept_ratio(&diag, proposal_exponent(gap), &z);
        worst = worst.max(v);
        lowest = lowest.min(v);
    }
    records.push(ValidationRecord::at_most("sampler/log_ratio_upper_bound", worst, -0.5 + 1e-12));
    records.push(ValidationRecord::at_most("sampler/log_ratio_lower_bound", -lowest, 1.0));
    Ok(records)
}

fn posterior_suite(seed: u64) -> Result<Vec<ValidationRecord>> {
    let mut rng = BinghamSampler::stream(seed, u64::MAX - 4);
    let x0 = crate::sampler::uniform_on_sphere(5, &mut rng);
    let obs = generate_synthetic(&x0, 0.05, &mut rng)?;
    let batch = posterior_sample(&obs, 200, &SamplerConfig::with_seed(seed))?;
    let summary = mmse_estimate(&batch)?;
    let overlap = dot(&summary.top_direction, &x0).abs();

    let flat = Observation::new(SymmetricMatrix::identity(3), 1.0)?;
    let flat_summary = mmse_estimate(&posterior_sample(&flat, 2_000, &SamplerConfig::with_seed(seed))?)?;
    let mut flat_dev = 0.0f64;
    for i in 0..3 {
        for j in 0..3 {
            let target = if i == j { 1.0 / 3.0 } else { 0.0 };
            flat_dev = flat_dev.max((flat_summary.mmse.get(i, j) - target).abs());
        }
    }
    // entrywise standard error is at most ~0.3 / √N for the uniform law on S²
    let flat_band = 4.0 * 0.3 / (2_000f64).sqrt();

    Ok(vec![
        ValidationRecord::above("posterior/planted_overlap_d5_gamma0.05", overlap, 0.99),
        ValidationRecord::at_most("posterior/mmse_trace_error", (summary.trace - 1.0).abs(), 1e-12),
        ValidationRecord::at_most("posterior/uniform_mmse_isotropy", flat_dev, flat_band),
    ])
}

fn ratio_suite() -> Result<Vec<ValidationRecord>> {
    let omegas = default_omega_grid(8, 50);
    let mut records = Vec::new();
    let mut previous: Option<f64> = None;
    let mut min_step = f64::INFINITY;
    let mut last = 0.0;
    for sigma_sq in [0.0, 4.0, 16.0, 36.0] {
        let report = angular_gaussian_worst_ratio(sigma_sq, &omegas)?;
        // the best ratio is at least one by construction
        records.push(ValidationRecord::above(
            format!("ratio/best_ratio_sigma_sq_{sigma_sq}"),
            report.best_ratio,
            1.0 - 1e-12,
        ));
        if let Some(p) = previous {
            min_step = min_step.min(report.best_ratio - p);
        }
        previous = Some(report.best_ratio);
        last = report.best_ratio;
    }
    records.push(ValidationRecord::above("ratio/strictly_increasing_min_step", min_step, 0.0));
    records.push(ValidationRecord::above("ratio/best_ratio_at_sigma_sq_36", last, 10.0));
    Ok(records)
}
