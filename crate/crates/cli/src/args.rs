//! Command-line grammar.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hfcast_core::pipeline::{Denoiser, Horizon};
use hfcast_core::ssa::CovarianceEstimator;
use hfcast_core::wavelet::Padding;

pub const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), " (", env!("HFCAST_BUILD"), ")");

#[derive(Debug, Parser)]
#[command(name = "hfcast", version = VERSION, about = "Wavelet/SSA denoising and LSTM forecasting of 5-minute price bars")]
pub struct Cli {
    /// Seed for every random stream (network init, shuffling, fixtures)
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// JSON config file; command-line flags take precedence
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Directory for generated files
    #[arg(long, global = true, value_name = "DIR")]
    pub output_dir: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a bar CSV and summarise it
    Ingest(IngestArgs),
    /// Autocorrelation analysis and input-lag selection
    Analyze(AnalyzeArgs),
    /// Smooth the close with the wavelet or SSA denoiser
    Denoise(DenoiseArgs),
    /// Train one variant for one horizon and save the network
    Train(TrainArgs),
    /// Score a saved network on the test window of a bar file
    Evaluate(EvaluateArgs),
    /// Run the variant x horizon x seed matrix and write the reports
    Run(RunArgs),
    /// Re-render a saved JSON report
    Report(ReportArgs),
    /// Write the synthetic bar fixtures
    Fixtures(FixturesArgs),
}

fn parse_column(s: &str) -> Result<(String, String), String> {
    let (field, header) = s
        .split_once('=')
        .ok_or_else(|| format!("expected FIELD=HEADER, got `{s}`"))?;
    let field = field.trim().to_ascii_lowercase();
    if !["timestamp", "open", "high", "low", "close", "volume"].contains(&field.as_str()) {
        return Err(format!(
            "unknown field `{field}` (expected timestamp|open|high|low|close|volume)"
        ));
    }
    Ok((field, header.trim().to_string()))
}

fn parse_unit_open(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if (0.0..1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is not in [0, 1)"))
    }
}

fn parse_share(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v <= 1.0 {
        Ok(v)
    } else {
        Err(format!("{v} is not in (0, 1]"))
    }
}

fn parse_positive_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{v} is not a positive number"))
    }
}

fn parse_positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Bar CSV with timestamp, open, high, low, close and volume columns
    #[arg(long, value_name = "CSV")]
    pub input: PathBuf,

    /// Header name for a field, e.g. `close=Last` (repeatable)
    #[arg(long = "column", value_name = "FIELD=HEADER", value_parser = parse_column)]
    pub columns: Vec<(String, String)>,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[command(flatten)]
    pub input: InputArgs,

    /// Write the validated bars here
    #[arg(long, value_name = "CSV")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub input: InputArgs,

    /// Partial autocorrelations and the selected lag (default when no analysis is named)
    #[arg(long)]
    pub pacf: bool,

    /// Sample autocorrelations
    #[arg(long)]
    pub acf: bool,

    #[arg(long, value_name = "N", value_parser = parse_positive)]
    pub max_lag: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Wavelet,
    Ssa,
}

/// Denoiser parameters shared by `denoise` and the training commands.
#[derive(Debug, Default, Args)]
pub struct DenoiserArgs {
    /// Wavelet decomposition depth
    #[arg(long, value_parser = parse_positive)]
    pub levels: Option<usize>,

    /// Wavelet boundary handling
    #[arg(long, value_parser = clap::value_parser!(Padding))]
    pub padding: Option<Padding>,

    /// SSA embedding dimension
    #[arg(long = "ssa-m", value_name = "M", value_parser = parse_positive)]
    pub ssa_m: Option<usize>,

    /// Cumulative eigenvalue share kept by SSA
    #[arg(long, value_parser = parse_share)]
    pub ssa_threshold: Option<f64>,

    /// Subtract the mean before SSA embedding
    #[arg(long)]
    pub ssa_center: bool,

    /// SSA lag-covariance estimator
    #[arg(long, value_parser = clap::value_parser!(CovarianceEstimator))]
    pub ssa_covariance: Option<CovarianceEstimator>,
}

#[derive(Debug, Args)]
pub struct DenoiseArgs {
    #[command(flatten)]
    pub input: InputArgs,

    #[arg(long, value_enum)]
    pub method: Method,

    #[command(flatten)]
    pub denoiser: DenoiserArgs,

    /// Output CSV; a JSON sidecar is written next to it
    #[arg(long, value_name = "CSV")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default, Args)]
pub struct ModelArgs {
    #[command(flatten)]
    pub denoiser: DenoiserArgs,

    /// LSTM layer sizes, e.g. `150,50`
    #[arg(long, value_delimiter = ',', value_parser = parse_positive)]
    pub hidden: Option<Vec<usize>>,

    #[arg(long, value_parser = parse_positive)]
    pub epochs: Option<usize>,

    #[arg(long, value_parser = parse_positive)]
    pub batch_size: Option<usize>,

    #[arg(long, value_parser = parse_positive_f64)]
    pub learning_rate: Option<f64>,

    /// Dropout of every variant except the plain LSTM
    #[arg(long, value_parser = parse_unit_open)]
    pub dropout: Option<f64>,

    /// Largest lag considered when selecting the input window
    #[arg(long, value_parser = parse_positive)]
    pub max_lag: Option<usize>,

    /// Select the lag from the smoothed close
    #[arg(long)]
    pub pacf_on_smoothed: bool,

    /// Denoise the training prefix only, then extend bar by bar
    #[arg(long)]
    pub causal_denoise: bool,

    /// Minimum number of bars a run needs
    #[arg(long, value_parser = parse_positive)]
    pub min_bars: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub input: InputArgs,

    #[arg(long, value_parser = clap::value_parser!(Denoiser))]
    pub variant: Denoiser,

    #[arg(long, value_parser = clap::value_parser!(Horizon))]
    pub horizon: Horizon,

    #[command(flatten)]
    pub model: ModelArgs,

    /// Checkpoint path; the model metadata goes to the same path with a `.json` extension
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub input: InputArgs,

    /// Checkpoint written by `train`
    #[arg(long, value_name = "PATH")]
    pub model: PathBuf,

    /// Model metadata (defaults to the checkpoint path with a `.json` extension)
    #[arg(long, value_name = "PATH")]
    pub meta: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub input: InputArgs,

    /// `all` or a comma list of none, dropout-only, ssa, wavelet
    #[arg(long, default_value = "all")]
    pub variants: String,

    /// `all` or a comma list of short, medium, long (or 1h, 3h, 6h)
    #[arg(long, default_value = "all")]
    pub horizons: String,

    /// Training seeds (defaults to --seed)
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,

    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Text,
    Json,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// `report.json` written by `run`
    #[arg(long, value_name = "PATH")]
    pub report: PathBuf,

    #[arg(long, value_enum, default_value = "text")]
    pub format: ReportFormat,
}

#[derive(Debug, Args)]
pub struct FixturesArgs {
    /// Fixture names (standard, ar1, ar2, sine-noise, constant) or `all`
    #[arg(long, value_delimiter = ',', default_value = "all")]
    pub kind: Vec<String>,

    /// Number of bars (defaults to each fixture's own length)
    #[arg(long, value_parser = parse_positive)]
    pub bars: Option<usize>,
}
