//! Command-line surface. Flags mirror the flat config-file keys; a flag
//! given explicitly overrides the file value.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::FileConfig;
use crate::errors::CliResult;

#[derive(Parser)]
#[command(
    name = "mfdfa",
    version,
    about = "Multifractal fluctuation analysis of financial time series",
    after_help = "Tabular output is CSV with headers; summaries are JSON; \
                  fatal errors go to stderr as one JSON line. `-` reads stdin / writes stdout."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Validate, sort and clean a raw tick CSV (unix_timestamp,price,amount)
    Ingest(IngestArgs),
    /// Resample ticks onto a fixed-period price grid
    Resample(ResampleArgs),
    /// Estimate the generalized Hurst spectrum of one series
    Mfdfa(MfdfaArgs),
    /// Rolling-window h(2) / multifractal-degree trace
    Rolling(RollingArgs),
    /// Rolling Amihud illiquidity from tick data
    Illiq(IlliqArgs),
    /// Generate seeded synthetic series with known fractal properties
    Synth(SynthArgs),
    /// Inner-join timestamped tables into one figure-ready CSV
    Align(AlignArgs),
}

#[derive(Args)]
pub struct CommonArgs {
    /// Flat key=value config file mirroring this subcommand's flags
    #[arg(long, value_name = "FILE", global = false)]
    pub config: Option<PathBuf>,
    /// Write the effective merged configuration to FILE
    #[arg(long, value_name = "FILE")]
    pub dump_config: Option<PathBuf>,
    /// Worker threads (outputs are identical at any thread count)
    #[arg(long, value_name = "N")]
    pub threads: Option<usize>,
}

impl CommonArgs {
    pub fn file_config(&self) -> CliResult<FileConfig> {
        FileConfig::load(self.config.as_deref())
    }
}

#[derive(Args)]
pub struct IngestArgs {
    /// Tick CSV to read, `-` for stdin
    #[arg(long = "in", default_value = "-", value_name = "PATH")]
    pub input: String,
    /// Cleaned tick CSV to write, `-` for stdout
    #[arg(long = "out", default_value = "-", value_name = "PATH")]
    pub output: String,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args)]
pub struct ResampleArgs {
    #[arg(long = "in", default_value = "-", value_name = "PATH")]
    pub input: String,
    #[arg(long = "out", default_value = "-", value_name = "PATH")]
    pub output: String,
    /// Sampling period (e.g. 1h, 24h); 1h/6h/12h/24h unless --allow-any-dt
    #[arg(long, value_name = "DURATION")]
    pub dt: Option<String>,
    /// Gap policy for empty bins (carry-forward)
    #[arg(long, value_name = "POLICY")]
    pub fill: Option<String>,
    /// Accept sampling periods outside the supported set
    #[arg(long)]
    pub allow_any_dt: bool,
    #[command(flatten)]
    pub common: CommonArgs,
}

/// The MF-DFA estimator knobs shared by `mfdfa` and `rolling`.
#[derive(Args)]
pub struct MfdfaParamArgs {
    /// Detrending polynomial order
    #[arg(long, value_name = "M")]
    pub poly_order: Option<usize>,
    /// Smallest moment order of the q grid
    #[arg(long, value_name = "Q", allow_hyphen_values = true)]
    pub q_min: Option<f64>,
    /// Largest moment order of the q grid
    #[arg(long, value_name = "Q", allow_hyphen_values = true)]
    pub q_max: Option<f64>,
    /// Spacing of the q grid
    #[arg(long, value_name = "STEP")]
    pub q_step: Option<f64>,
    /// Explicit comma-separated scale list (overrides s-min/s-max/n-scales)
    #[arg(long, value_name = "S,S,...")]
    pub scales: Option<String>,
    /// Smallest scale of the generated grid
    #[arg(long, value_name = "S")]
    pub s_min: Option<usize>,
    /// Largest scale of the generated grid (default: N/4)
    #[arg(long, value_name = "S")]
    pub s_max: Option<usize>,
    /// Number of log-spaced scales
    #[arg(long, value_name = "K")]
    pub n_scales: Option<usize>,
    /// Lower clamp for segment variances
    #[arg(long, value_name = "EPS")]
    pub variance_floor: Option<f64>,
}

#[derive(Args)]
pub struct MfdfaArgs {
    /// Series CSV (timestamp,value), `-` for stdin
    #[arg(long = "in", default_value = "-", value_name = "PATH")]
    pub input: String,
    /// Spectrum CSV (q,h,stderr,r2), `-` for stdout
    #[arg(long = "out", default_value = "-", value_name = "PATH")]
    pub output: String,
    /// Summary JSON path (default: stdout when --out is a file)
    #[arg(long, value_name = "PATH")]
    pub summary: Option<String>,
    /// Also export the fluctuation surface (q,s,F) here
    #[arg(long, value_name = "PATH")]
    pub surface: Option<String>,
    /// Input is a price series; take log-returns first
    #[arg(long)]
    pub prices: bool,
    /// Assert the series sampling period
    #[arg(long, value_name = "DURATION")]
    pub dt: Option<String>,
    /// Half-width of the efficiency band for the classification
    #[arg(long, value_name = "B")]
    pub band: Option<f64>,
    #[command(flatten)]
    pub params: MfdfaParamArgs,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args)]
pub struct RollingArgs {
    #[arg(long = "in", default_value = "-", value_name = "PATH")]
    pub input: String,
    /// Trace CSV (timestamp,h2,delta_h,illiq), `-` for stdout
    #[arg(long = "out", default_value = "-", value_name = "PATH")]
    pub output: String,
    /// Input is a price series; take log-returns first
    #[arg(long)]
    pub prices: bool,
    /// Assert the series sampling period
    #[arg(long, value_name = "DURATION")]
    pub dt: Option<String>,
    /// Window length (e.g. 365d)
    #[arg(long, value_name = "DURATION")]
    pub window: Option<String>,
    /// Step between window ends (e.g. 1d)
    #[arg(long, value_name = "DURATION")]
    pub step: Option<String>,
    /// Minimum fraction of real (non-gap-filled) samples per window
    #[arg(long, value_name = "FRAC")]
    pub min_coverage: Option<f64>,
    #[command(flatten)]
    pub params: MfdfaParamArgs,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args)]
pub struct IlliqArgs {
    /// Tick CSV (unix_timestamp,price,amount), `-` for stdin
    #[arg(long = "in", default_value = "-", value_name = "PATH")]
    pub input: String,
    /// ILLIQ CSV (timestamp,illiq,days_used,days_skipped), `-` for stdout
    #[arg(long = "out", default_value = "-", value_name = "PATH")]
    pub output: String,
    /// Rolling window length in days
    #[arg(long, value_name = "DAYS")]
    pub window_days: Option<u32>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args)]
pub struct SynthArgs {
    /// Series CSV to write, `-` for stdout
    #[arg(long = "out", default_value = "-", value_name = "PATH")]
    pub output: String,
    /// Generator: gaussian, fgn or cascade
    #[arg(long, value_name = "KIND")]
    pub kind: Option<String>,
    /// Series length (gaussian, fgn)
    #[arg(long, value_name = "N")]
    pub n: Option<usize>,
    /// Hurst parameter in (0, 1) (fgn)
    #[arg(long, alias = "H", value_name = "H")]
    pub hurst: Option<f64>,
    /// Cascade multiplier in (0.5, 1)
    #[arg(long, value_name = "A")]
    pub param_a: Option<f64>,
    /// Cascade depth k; the series has 2^k samples
    #[arg(long, value_name = "K")]
    pub depth: Option<u32>,
    /// Generator seed
    #[arg(long, value_name = "SEED")]
    pub seed: Option<u64>,
    /// Sampling period to stamp on the output
    #[arg(long, value_name = "DURATION")]
    pub dt: Option<String>,
    /// RFC 3339 timestamp of the first sample
    #[arg(long, value_name = "TIME")]
    pub start: Option<String>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args)]
pub struct AlignArgs {
    /// Input tables (repeat --in; at least two)
    #[arg(long = "in", value_name = "PATH")]
    pub inputs: Vec<String>,
    /// Joined CSV, `-` for stdout
    #[arg(long = "out", default_value = "-", value_name = "PATH")]
    pub output: String,
    #[command(flatten)]
    pub common: CommonArgs,
}
