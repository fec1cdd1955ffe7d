//! Command-line front end: `bingham sample`, `bingham posterior` and
//! `bingham validate`.
//!
//! Exit codes: 0 success, 1 sampling failure or I/O error on output,
//! 2 unreadable input or bad usage, 3 invalid matrix or configuration,
//! 4 nonpositive noise scale. `validate` also exits 3 when any check fails.

pub mod matrix_io;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use bingham::validation::{run_suite, Suite, ValidationRecord};
use bingham::{mmse_estimate, BinghamSampler, Observation, SampleBatch, SamplerConfig};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use thiserror::Error;

pub use matrix_io::{format_matrix, parse_matrix, read_matrix, MatrixFormat, ParsedMatrix};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Gamma(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Runtime(_) => 1,
            CliError::Parse(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Gamma(_) => 4,
        }
    }
}

impl From<bingham::Error> for CliError {
    fn from(e: bingham::Error) -> Self {
        match e {
            bingham::Error::InvalidInput(_) | bingham::Error::DimensionMismatch { .. } => {
                CliError::Validation(e.to_string())
            }
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "bingham", version, about = "Exact sampling from Bingham distributions on the sphere")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw samples from p(x) ∝ exp(xᵀAx).
    Sample(SampleArgs),
    /// Sample the rank-one posterior exp(xᵀYx / 2γ²) and report the MMSE estimate.
    Posterior(PosteriorArgs),
    /// Run a validation suite and print its JSON report.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub matrix: PathBuf,
    /// Input format; inferred from the file extension when omitted.
    #[arg(long, value_enum)]
    pub format: Option<MatrixFormat>,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Args)]
pub struct PosteriorArgs {
    #[arg(long)]
    pub observation: PathBuf,
    #[arg(long, value_enum)]
    pub format: Option<MatrixFormat>,
    /// Noise scale of the observation.
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: f64,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, default_value_t = 1000)]
    pub count: usize,
    #[arg(long, env = "BINGHAM_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 1_000_000)]
    pub max_rejections: u64,
    /// Target accuracy of each CDF inversion.
    #[arg(long, default_value_t = 1e-13)]
    pub tolerance: f64,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// One of moments, cdf, sampler, posterior, ratio, all.
    #[arg(long, default_value = "all")]
    pub suite: String,
    #[arg(long, env = "BINGHAM_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct SampleLine<'a> {
    x: &'a [f64],
    proposals: u64,
}

#[derive(Serialize)]
struct RunLine {
    acceptance_rate: f64,
    seed: u64,
    n: u64,
    gap: f64,
}

#[derive(Serialize)]
struct PosteriorLine {
    mmse: Vec<Vec<f64>>,
    top_direction: Vec<f64>,
    trace: f64,
}

#[derive(Serialize)]
struct ValidationReport<'a> {
    suite: String,
    seed: u64,
    pass: bool,
    records: &'a [ValidationRecord],
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return e.exit_code();
        }
    };
    let result = match cli.command {
        Command::Sample(args) => cmd_sample(&args, stderr),
        Command::Posterior(args) => cmd_posterior(&args, stderr),
        Command::Validate(args) => cmd_validate(&args),
    };
    let finished = result.and_then(|(text, code, out)| {
        emit(&text, out.as_deref(), stdout)?;
        Ok(code)
    });
    match finished {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

type CommandOutput = (String, i32, Option<PathBuf>);

fn emit(text: &str, out: Option<&Path>, stdout: &mut dyn Write) -> Result<(), CliError> {
    match out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
        }
        None => stdout.write_all(text.as_bytes()).map_err(|e| CliError::Runtime(format!("cannot write output: {e}"))),
    }
}

fn load(path: &Path, format: Option<MatrixFormat>, stderr: &mut dyn Write) -> Result<ParsedMatrix, CliError> {
    let parsed = read_matrix(path, format.unwrap_or_else(|| MatrixFormat::infer(path)))?;
    if parsed.symmetrized {
        let _ = writeln!(stderr, "warning: {} is not symmetric; using (A + Aᵀ)/2", path.display());
    }
    Ok(parsed)
}

fn config(run: &RunArgs) -> Result<SamplerConfig, CliError> {
    let cfg = SamplerConfig { seed: run.seed, max_rejections: run.max_rejections, cdf_tolerance: run.tolerance };
    cfg.validate()?;
    if run.count == 0 {
        return Err(CliError::Validation("--count must be at least 1".into()));
    }
    Ok(cfg)
}

fn json_line<T: Serialize>(out: &mut String, value: &T) {
    out.push_str(&serde_json::to_string(value).expect("records hold finite numbers"));
    out.push('\n');
}

fn sample_lines(batch: &SampleBatch, sampler: &BinghamSampler) -> String {
    let mut out = String::new();
    for (x, &proposals) in batch.samples.iter().zip(&batch.proposals_used) {
        json_line(&mut out, &SampleLine { x, proposals });
    }
    let shift = sampler.shift();
    json_line(
        &mut out,
        &RunLine { acceptance_rate: batch.total_acceptance_rate, seed: batch.seed, n: shift.exponent, gap: shift.gap },
    );
    out
}

pub fn cmd_sample(args: &SampleArgs, stderr: &mut dyn Write) -> Result<CommandOutput, CliError> {
    let cfg = config(&args.run)?;
    let a = load(&args.matrix, args.format, stderr)?.matrix;
    let sampler = BinghamSampler::new(&a)?;
    let batch = sampler.sample_batch(args.run.count, &cfg)?;
    let _ = writeln!(stderr, "{} samples", batch.len());
    Ok((sample_lines(&batch, &sampler), 0, args.run.out.clone()))
}

pub fn cmd_posterior(args: &PosteriorArgs, stderr: &mut dyn Write) -> Result<CommandOutput, CliError> {
    if !(args.gamma > 0.0 && args.gamma.is_finite()) {
        return Err(CliError::Gamma(format!("--gamma must be positive, got {}", args.gamma)));
    }
    let cfg = config(&args.run)?;
    let y = load(&args.observation, args.format, stderr)?.matrix;
    let obs = Observation::new(y, args.gamma)?;
    let sampler = BinghamSampler::new(&bingham::build_posterior(&obs)?)?;
    let batch = sampler.sample_batch(args.run.count, &cfg)?;
    let summary = mmse_estimate(&batch)?;
    let mut text = sample_lines(&batch, &sampler);
    json_line(
        &mut text,
        &PosteriorLine { mmse: summary.mmse.rows(), top_direction: summary.top_direction, trace: summary.trace },
    );
    let _ = writeln!(stderr, "{} samples", batch.len());
    Ok((text, 0, args.run.out.clone()))
}

pub fn cmd_validate(args: &ValidateArgs) -> Result<CommandOutput, CliError> {
    let suite: Suite = args.suite.parse().map_err(|e: bingham::Error| CliError::Parse(e.to_string()))?;
    let records = run_suite(suite, args.seed)?;
    let pass = records.iter().all(|r| r.pass);
    let report = ValidationReport { suite: suite.to_string(), seed: args.seed, pass, records: &records };
    let mut text = serde_json::to_string_pretty(&report).expect("report holds finite numbers");
    text.push('\n');
    Ok((text, if pass { 0 } else { 3 }, args.out.clone()))
}
