//! The four-variant, three-horizon forecasting experiment.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::bars::BarSeries;
use super::features::{build_features, FeatureSet, Scaling, WindowedDataset};
use super::PipelineError;
use crate::lagstats::{pacf, DEFAULT_MAX_LAG};
use crate::lstm::{
    train, AdamConfig, LstmNetwork, Sequence, TrainConfig, DEFAULT_DROPOUT, DEFAULT_HIDDEN,
};
use crate::metrics::EvalReport;
use crate::ssa::{
    ssa_denoise, CovarianceEstimator, SsaOptions, DEFAULT_EMBEDDING, DEFAULT_THRESHOLD,
};
use crate::wavelet::{wavelet_denoise, Padding, WaveletFilter, DEFAULT_LEVELS};

/// Model variant, named after the preprocessing applied to the close.
/// Ordering follows the report row order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Denoiser {
    /// Plain LSTM on OHLC windows, no dropout.
    None,
    /// Same inputs as `None`, dropout enabled.
    DropoutOnly,
    Ssa,
    Wavelet,
}

impl Denoiser {
    pub const ALL: [Denoiser; 4] = [
        Denoiser::None,
        Denoiser::DropoutOnly,
        Denoiser::Ssa,
        Denoiser::Wavelet,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Denoiser::None => "LSTM",
            Denoiser::DropoutOnly => "Dropout-LSTM",
            Denoiser::Ssa => "SSA-LSTM",
            Denoiser::Wavelet => "WT-LSTM",
        }
    }

    /// File-name friendly form of the label.
    pub fn slug(self) -> &'static str {
        match self {
            Denoiser::None => "lstm",
            Denoiser::DropoutOnly => "dropout-lstm",
            Denoiser::Ssa => "ssa-lstm",
            Denoiser::Wavelet => "wt-lstm",
        }
    }

    pub fn smooths(self) -> bool {
        matches!(self, Denoiser::Ssa | Denoiser::Wavelet)
    }
}

impl fmt::Display for Denoiser {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Denoiser {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "none" | "lstm" => Ok(Denoiser::None),
            "dropout" | "dropout-only" | "dropout-lstm" => Ok(Denoiser::DropoutOnly),
            "ssa" | "ssa-lstm" => Ok(Denoiser::Ssa),
            "wavelet" | "wt" | "wt-lstm" => Ok(Denoiser::Wavelet),
            other => Err(format!(
                "unknown variant `{other}` (expected none|dropout-only|ssa|wavelet)"
            )),
        }
    }
}

/// Length of the held-out window in 5-minute bars.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Horizon {
    Short,
    Medium,
    Long,
}

impl Horizon {
    pub const ALL: [Horizon; 3] = [Horizon::Short, Horizon::Medium, Horizon::Long];

    pub fn steps(self) -> usize {
        match self {
            Horizon::Short => 12,
            Horizon::Medium => 36,
            Horizon::Long => 72,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Horizon::Short => "1h",
            Horizon::Medium => "3h",
            Horizon::Long => "6h",
        }
    }
}

impl fmt::Display for Horizon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Horizon {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "short" | "1h" | "12" => Ok(Horizon::Short),
            "medium" | "3h" | "36" => Ok(Horizon::Medium),
            "long" | "6h" | "72" => Ok(Horizon::Long),
            other => Err(format!(
                "unknown horizon `{other}` (expected short|medium|long)"
            )),
        }
    }
}

/// Everything except the variant, horizon and seed of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub wavelet_levels: usize,
    pub wavelet_padding: Padding,
    pub ssa_embedding: usize,
    pub ssa_threshold: f64,
    pub ssa_center: bool,
    pub ssa_covariance: CovarianceEstimator,
    pub max_lag: usize,
    /// Select the lag from the PACF of the smoothed close instead of the raw
    /// close (denoised variants only).
    pub pacf_on_smoothed: bool,
    /// Denoise the training prefix only and extend the smoothed series one
    /// bar at a time through the test window.
    pub causal_denoise: bool,
    pub hidden: Vec<usize>,
    /// Dropout of every variant except the plain LSTM.
    pub dropout: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub min_bars: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            wavelet_levels: DEFAULT_LEVELS,
            wavelet_padding: Padding::Symmetric,
            ssa_embedding: DEFAULT_EMBEDDING,
            ssa_threshold: DEFAULT_THRESHOLD,
            ssa_center: false,
            ssa_covariance: CovarianceEstimator::Trajectory,
            max_lag: DEFAULT_MAX_LAG,
            pacf_on_smoothed: false,
            causal_denoise: false,
            hidden: DEFAULT_HIDDEN.to_vec(),
            dropout: DEFAULT_DROPOUT,
            epochs: 10,
            batch_size: 32,
            learning_rate: AdamConfig::default().learning_rate,
            min_bars: 500,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |msg: String| Err(PipelineError::InvalidConfig(msg));
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return bad(format!(
                "hidden sizes {:?} must be non-empty and positive",
                self.hidden
            ));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad(format!("dropout {} must lie in [0, 1)", self.dropout));
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return bad("epochs and batch_size must be positive".into());
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!(
                "learning rate {} must be positive",
                self.learning_rate
            ));
        }
        if self.max_lag == 0 {
            return bad("max_lag must be positive".into());
        }
        if !(self.ssa_threshold > 0.0 && self.ssa_threshold <= 1.0) {
            return bad(format!(
                "ssa_threshold {} must lie in (0, 1]",
                self.ssa_threshold
            ));
        }
        if self.ssa_embedding == 0 {
            return bad("ssa_embedding must be positive".into());
        }
        if self.wavelet_levels == 0 || self.wavelet_levels > crate::wavelet::MAX_LEVELS {
            return bad(format!(
                "wavelet_levels {} must lie in 1..={}",
                self.wavelet_levels,
                crate::wavelet::MAX_LEVELS
            ));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(
            serde_json::to_vec(self).expect("config serialises"),
        ))
    }

    pub fn dropout_for(&self, variant: Denoiser) -> f64 {
        match variant {
            Denoiser::None => 0.0,
            _ => self.dropout,
        }
    }
}

/// SHA-256 over the little-endian bytes of a series.
pub fn series_hash(values: &[f64]) -> String {
    let mut h = Sha256::new();
    for v in values {
        h.update(v.to_le_bytes());
    }
    hex::encode(h.finalize())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RunSpec {
    pub variant: Denoiser,
    pub horizon: Horizon,
    pub seed: u64,
}

/// All (seed, horizon, variant) combinations in report order.
pub fn run_specs(variants: &[Denoiser], horizons: &[Horizon], seeds: &[u64]) -> Vec<RunSpec> {
    let mut variants = variants.to_vec();
    variants.sort();
    variants.dedup();
    let mut horizons = horizons.to_vec();
    horizons.sort();
    horizons.dedup();
    let mut specs = Vec::new();
    for &seed in seeds {
        for &horizon in &horizons {
            for &variant in &variants {
                specs.push(RunSpec {
                    variant,
                    horizon,
                    seed,
                });
            }
        }
    }
    specs.dedup();
    specs
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexRange {
    pub start: usize,
    pub end: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub variant: Denoiser,
    pub label: String,
    pub horizon: Horizon,
    pub horizon_steps: usize,
    pub seed: u64,
    pub feature_set: FeatureSet,
    pub feature_columns: Vec<String>,
    pub lag: usize,
    pub lag_source: String,
    /// SSA components kept, when applicable.
    pub ssa_components: Option<Vec<usize>>,
    pub dropout: f64,
    /// Sample indices used for training and testing.
    pub train_samples: IndexRange,
    pub test_samples: IndexRange,
    pub data_hash: String,
    /// Hash of the price column the feature builder received.
    pub input_series_hash: String,
    pub config_hash: String,
    pub loss_trace: Vec<f64>,
    pub timestamps: Vec<i64>,
    pub actuals: Vec<f64>,
    pub predictions: Vec<f64>,
    pub metrics: EvalReport,
    pub timing_ms: u64,
}

/// Smoothed close and, for SSA, the kept components.
fn denoise(
    close: &[f64],
    variant: Denoiser,
    cfg: &ExperimentConfig,
) -> Result<(Vec<f64>, Option<Vec<usize>>), PipelineError> {
    match variant {
        Denoiser::Wavelet => Ok((
            wavelet_denoise(
                close,
                cfg.wavelet_levels,
                &WaveletFilter::sym4(),
                cfg.wavelet_padding,
            )?,
            None,
        )),
        Denoiser::Ssa => {
            let options = SsaOptions {
                center: cfg.ssa_center,
                covariance: cfg.ssa_covariance,
            };
            let (smooth, _, selected) =
                ssa_denoise(close, cfg.ssa_embedding, cfg.ssa_threshold, options)?;
            Ok((smooth, Some(selected)))
        }
        Denoiser::None | Denoiser::DropoutOnly => Ok((close.to_vec(), None)),
    }
}

/// Smoothed close for a denoising variant. In causal mode the first
/// `test_start` bars are denoised as one block and every later bar `t`
/// takes the last value of the denoised prefix `close[..=t]`.
pub fn smooth_close(
    close: &[f64],
    variant: Denoiser,
    cfg: &ExperimentConfig,
    test_start: usize,
) -> Result<(Vec<f64>, Option<Vec<usize>>), PipelineError> {
    if !cfg.causal_denoise {
        return denoise(close, variant, cfg);
    }
    let (mut smooth, selected) = denoise(&close[..test_start], variant, cfg)?;
    for t in test_start..close.len() {
        let (prefix, _) = denoise(&close[..=t], variant, cfg)?;
        smooth.push(*prefix.last().expect("non-empty prefix"));
    }
    Ok((smooth, selected))
}

fn derive_seed(seed: u64, stream: u64) -> u64 {
    // splitmix64 finaliser
    let mut z = seed.wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Everything needed to re-score a trained network on new bars.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelMeta {
    pub variant: Denoiser,
    pub horizon: Horizon,
    pub seed: u64,
    pub lag: usize,
    pub feature_set: FeatureSet,
    pub scaling: Scaling,
    pub config: ExperimentConfig,
    pub data_hash: String,
}

/// Test-window forecast of a trained network.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Forecast {
    pub timestamps: Vec<i64>,
    pub actuals: Vec<f64>,
    pub predictions: Vec<f64>,
    pub metrics: EvalReport,
}

fn required_bars(cfg: &ExperimentConfig, horizon: usize) -> usize {
    cfg.min_bars
        .max(2 * cfg.max_lag + 1)
        .max(horizon + cfg.batch_size + cfg.max_lag + 1)
}

/// Smoothed close (if the variant smooths) and the feature windows.
fn windows_for(
    bars: &BarSeries,
    cfg: &ExperimentConfig,
    variant: Denoiser,
    horizon: usize,
    lag: Option<usize>,
) -> Result<(WindowedDataset, String, Option<Vec<usize>>), PipelineError> {
    let close = &bars.close;
    let test_start = close.len() - horizon;
    let (smoothed, ssa_components) = if variant.smooths() {
        let (s, sel) = smooth_close(close, variant, cfg, test_start)?;
        (Some(s), sel)
    } else {
        (None, None)
    };
    let (lag_series, lag_source) = match (&smoothed, cfg.pacf_on_smoothed) {
        (Some(s), true) => (s.as_slice(), "smoothed_close"),
        _ => (close.as_slice(), "close"),
    };
    let lag = match lag {
        Some(l) => l,
        None => pacf(lag_series, cfg.max_lag)?.selected_lag,
    };
    let dataset = build_features(bars, smoothed.as_deref(), lag)?;
    Ok((dataset, lag_source.to_string(), ssa_components))
}

fn forecast(
    net: &LstmNetwork,
    bars: &BarSeries,
    dataset: &WindowedDataset,
    scaling: &Scaling,
    range: std::ops::Range<usize>,
) -> Result<Forecast, PipelineError> {
    let test_set = dataset.samples(range.clone(), scaling);
    let inputs: Vec<&Sequence> = test_set.iter().map(|s| &s.input).collect();
    let predictions: Vec<f64> = net
        .predict(&inputs)?
        .into_iter()
        .map(|p| scaling.target.inverse(p))
        .collect();
    let actuals = dataset.targets[range.clone()].to_vec();
    let metrics = EvalReport::compute(&actuals, &predictions)?;
    let timestamps = dataset.target_index[range]
        .iter()
        .map(|&i| bars.timestamps[i])
        .collect();
    Ok(Forecast {
        timestamps,
        actuals,
        predictions,
        metrics,
    })
}

pub fn run_experiment(
    bars: &BarSeries,
    cfg: &ExperimentConfig,
    spec: RunSpec,
) -> Result<RunResult, PipelineError> {
    train_and_evaluate(bars, cfg, spec).map(|(result, _, _)| result)
}

/// [`run_experiment`] that also hands back the trained network and the
/// metadata needed to score it again.
pub fn train_and_evaluate(
    bars: &BarSeries,
    cfg: &ExperimentConfig,
    spec: RunSpec,
) -> Result<(RunResult, LstmNetwork, ModelMeta), PipelineError> {
    let started = Instant::now();
    cfg.validate()?;
    let n = bars.len();
    let horizon = spec.horizon.steps();
    let required = required_bars(cfg, horizon);
    if n < required {
        return Err(PipelineError::InsufficientData { bars: n, required });
    }

    let (dataset, lag_source, ssa_components) =
        windows_for(bars, cfg, spec.variant, horizon, None)?;
    let lag = dataset.lag;
    let total = dataset.len();
    let train_count = total - horizon;
    if train_count < cfg.batch_size {
        return Err(PipelineError::InsufficientData { bars: n, required });
    }
    let scaling = dataset.fit_scaling(train_count);
    let train_set = dataset.samples(0..train_count, &scaling);

    let dropout = cfg.dropout_for(spec.variant);
    let mut net = LstmNetwork::new(
        dataset.features(),
        &cfg.hidden,
        dropout,
        derive_seed(spec.seed, 1),
    )?;
    let train_cfg = TrainConfig {
        epochs: cfg.epochs,
        batch_size: cfg.batch_size,
        adam: AdamConfig {
            learning_rate: cfg.learning_rate,
            ..AdamConfig::default()
        },
        seed: derive_seed(spec.seed, 2),
        shuffle: true,
    };
    let loss_trace = train(&mut net, &train_set, &train_cfg)?;
    let fc = forecast(&net, bars, &dataset, &scaling, train_count..total)?;
    let data_hash = series_hash(&bars.close);

    let meta = ModelMeta {
        variant: spec.variant,
        horizon: spec.horizon,
        seed: spec.seed,
        lag,
        feature_set: dataset.feature_set,
        scaling: scaling.clone(),
        config: cfg.clone(),
        data_hash: data_hash.clone(),
    };
    let result = RunResult {
        variant: spec.variant,
        label: spec.variant.label().to_string(),
        horizon: spec.horizon,
        horizon_steps: horizon,
        seed: spec.seed,
        feature_set: dataset.feature_set,
        feature_columns: dataset
            .feature_set
            .columns()
            .iter()
            .map(|c| c.to_string())
            .collect(),
        lag,
        lag_source,
        ssa_components,
        dropout,
        train_samples: IndexRange {
            start: 0,
            end: train_count,
        },
        test_samples: IndexRange {
            start: train_count,
            end: total,
        },
        data_hash,
        input_series_hash: series_hash(&dataset.price_series()),
        config_hash: cfg.hash(),
        loss_trace,
        timestamps: fc.timestamps,
        actuals: fc.actuals,
        predictions: fc.predictions,
        metrics: fc.metrics,
        timing_ms: started.elapsed().as_millis() as u64,
    };
    Ok((result, net, meta))
}

/// Scores a trained network on the last `meta.horizon` samples of `bars`,
/// reusing the stored lag and scaling.
pub fn evaluate_model(
    bars: &BarSeries,
    net: &LstmNetwork,
    meta: &ModelMeta,
) -> Result<Forecast, PipelineError> {
    let horizon = meta.horizon.steps();
    if bars.len() < horizon + meta.lag + 1 {
        return Err(PipelineError::InsufficientData {
            bars: bars.len(),
            required: horizon + meta.lag + 1,
        });
    }
    let (dataset, _, _) = windows_for(bars, &meta.config, meta.variant, horizon, Some(meta.lag))?;
    if dataset.features() != net.input_dim() {
        return Err(PipelineError::LengthMismatch {
            expected: net.input_dim(),
            found: dataset.features(),
        });
    }
    let total = dataset.len();
    forecast(net, bars, &dataset, &meta.scaling, total - horizon..total)
}

/// One failed run of a matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunFailure {
    pub spec: RunSpec,
    pub error: String,
}

/// Runs every spec in parallel; a failing run does not affect the others.
/// Results keep the order of `specs`.
pub fn run_matrix(
    bars: &BarSeries,
    cfg: &ExperimentConfig,
    specs: &[RunSpec],
) -> Vec<Result<RunResult, RunFailure>> {
    specs
        .par_iter()
        .map(|&spec| {
            run_experiment(bars, cfg, spec).map_err(|e| RunFailure {
                spec,
                error: e.to_string(),
            })
        })
        .collect()
}
