//! Command-line surface.

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "hound",
    version,
    about = "Online high-order numerical differentiation by cumulative smoothing",
    long_about = "Streams (t, f) samples through a parameter-free high-order \
differentiator, estimating the signal and its derivatives, extracting global \
polynomial coefficients, and interpolating/extrapolating the fitted model. \
Exit codes: 0 success, 1 validation failure, 2 input error."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Stream samples through the differentiator, emitting one output row
    /// per accepted input row plus a final summary
    Run(RunArgs),
    /// Emit a CSV sample stream from a signal description
    Generate(GenerateArgs),
    /// Check every exact coefficient identity up to a maximum order
    VerifyIdentities {
        /// Highest order to verify
        #[arg(long, default_value_t = hound_core::IDENTITY_MAX_ORDER)]
        max_order: usize,
    },
    /// Cross-validate the recurrence against the continuous reference
    /// model (RK4, closed-form errors, Lipschitz bound)
    OracleCheck(OracleArgs),
    /// Measure the noise-variance decay slopes across Monte Carlo replicas
    VarianceCheck(VarianceArgs),
    /// Stream samples and print the recovered polynomial coefficients
    ExtractCoeffs(ExtractArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    #[value(name = "json-lines", alias = "jsonl")]
    JsonLines,
}

#[derive(Parser, Debug)]
pub struct RunArgs {
    /// Number of tracked quantities (signal + order-1 derivatives);
    /// required unless --resume-from supplies it
    #[arg(long)]
    pub order: Option<usize>,

    /// Input path, or `-` for stdin
    #[arg(long, default_value = "-")]
    pub input: String,

    /// Output path, or `-` for stdout
    #[arg(long, default_value = "-")]
    pub output: String,

    /// Columns holding (t, f), by 0-based index or header name
    #[arg(long, default_value = "0,1")]
    pub columns: String,

    /// Fixed sample spacing: ignore input timestamps and synthesize
    /// t = t0, t0+dt, ... (reads only the value column)
    #[arg(long)]
    pub dt: Option<f64>,

    /// Start time used with --dt
    #[arg(long, default_value_t = 0.0)]
    pub t0: f64,

    /// Output format
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,

    /// Comma list of extras: errors (needs --truth), coeffs, extrapolation
    /// (needs --extrapolate); estimates and the residual are always emitted
    #[arg(long, default_value = "estimates,residual")]
    pub emit: String,

    /// Signal description file providing analytic derivatives for the
    /// error columns
    #[arg(long)]
    pub truth: Option<PathBuf>,

    /// Extrapolation table range as start:end:step
    #[arg(long)]
    pub extrapolate: Option<String>,

    /// Write the final state here (resume later with --resume-from)
    #[arg(long)]
    pub save_snapshot: Option<PathBuf>,

    /// Restore the state saved by --save-snapshot and continue
    #[arg(long)]
    pub resume_from: Option<PathBuf>,

    /// Ignore samples whose value repeats the previous one
    #[arg(long, default_value_t = false)]
    pub skip_repeats: bool,
}

#[derive(Parser, Debug)]
pub struct GenerateArgs {
    /// Signal description file (key = value; see README)
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Polynomial coefficients, ascending powers, comma-separated
    #[arg(long)]
    pub poly: Option<String>,

    /// Harmonic term amplitude:angular_frequency:phase (repeatable)
    #[arg(long)]
    pub harmonic: Vec<String>,

    /// Noise standard deviation
    #[arg(long)]
    pub sigma: Option<f64>,

    /// Noise seed
    #[arg(long)]
    pub seed: Option<u64>,

    #[arg(long)]
    pub t_start: Option<f64>,

    #[arg(long)]
    pub t_end: Option<f64>,

    #[arg(long)]
    pub dt: Option<f64>,

    /// Output path, or `-` for stdout
    #[arg(long, default_value = "-")]
    pub output: String,
}

#[derive(Parser, Debug)]
pub struct OracleArgs {
    /// Order used for the closed-form comparison
    #[arg(long, default_value_t = 3)]
    pub order: usize,

    /// End of the comparison window (starts at t = 1)
    #[arg(long, default_value_t = 50.0)]
    pub t_end: f64,
}

#[derive(Parser, Debug)]
pub struct VarianceArgs {
    #[arg(long, default_value_t = 3)]
    pub order: usize,

    /// Polynomial part of the test signal (degree must stay below order)
    #[arg(long, default_value = "1,0.5,0.02")]
    pub poly: String,

    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,

    #[arg(long, default_value_t = 7)]
    pub seed: u64,

    /// Monte Carlo replicas (at least 100)
    #[arg(long, default_value_t = 200)]
    pub runs: usize,

    /// Comma list of measurement times
    #[arg(long, default_value = "1000,2000,5000,10000")]
    pub grid: String,

    /// Accepted deviation of each fitted slope from -(2m-1)
    #[arg(long, default_value_t = 0.3)]
    pub tolerance: f64,
}

#[derive(Parser, Debug)]
pub struct ExtractArgs {
    #[arg(long)]
    pub order: usize,

    /// Input path, or `-` for stdin
    #[arg(long, default_value = "-")]
    pub input: String,

    /// Columns holding (t, f), by 0-based index or header name
    #[arg(long, default_value = "0,1")]
    pub columns: String,

    /// Fixed sample spacing (see `run --dt`)
    #[arg(long)]
    pub dt: Option<f64>,

    /// Start time used with --dt
    #[arg(long, default_value_t = 0.0)]
    pub t0: f64,
}
