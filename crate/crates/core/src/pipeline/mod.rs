//! Bars in, forecasts and comparison tables out.
//!
//! Each run denoises the close (or not), picks the input lag from the PACF,
//! builds lagged windows, scales them with train-only statistics, trains a
//! fresh network and scores it on the last `horizon` bars.

pub mod bars;
pub mod compare;
pub mod experiment;
pub mod features;
pub mod fixtures;
pub mod reference;
pub mod report;

use thiserror::Error;

use crate::lagstats::LagError;
use crate::lstm::LstmError;
use crate::metrics::MetricsError;
use crate::ssa::SsaError;
use crate::wavelet::WaveletError;

pub use bars::{
    ingest_csv, ingest_reader, write_bars_csv, BarSeries, ColumnMap, IngestError, Ingested,
    RowDiagnostic,
};
pub use compare::{
    compare_all, compare_models, improvement_pct, ComparisonRow, ComparisonTable, ModelScore,
};
pub use experiment::{
    evaluate_model, run_experiment, run_matrix, run_specs, series_hash, smooth_close,
    train_and_evaluate, Denoiser, ExperimentConfig, Forecast, Horizon, ModelMeta, RunFailure,
    RunResult, RunSpec,
};
pub use features::{build_features, FeatureSet, MinMax, Scaling, WindowedDataset};
pub use report::{build_report, plot_csv, render_text, ForecastReport};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("{bars} bars available, at least {required} required")]
    InsufficientData { bars: usize, required: usize },
    #[error("lag {lag} needs a series longer than {len} bars")]
    SeriesTooShortForLag { lag: usize, len: usize },
    #[error("expected {expected} values, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("wavelet: {0}")]
    Wavelet(#[from] WaveletError),
    #[error("ssa: {0}")]
    Ssa(#[from] SsaError),
    #[error("lag selection: {0}")]
    Lag(#[from] LagError),
    #[error("network: {0}")]
    Lstm(#[from] LstmError),
    #[error("metrics: {0}")]
    Metrics(#[from] MetricsError),
    #[error("cannot compare runs: {0}")]
    MismatchedRuns(String),
    #[error("no LSTM baseline for horizon {horizon}, seed {seed}")]
    MissingBaseline { horizon: Horizon, seed: u64 },
}
