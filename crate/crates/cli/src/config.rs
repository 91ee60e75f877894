//! Config-file loading and flag precedence.

use std::collections::BTreeSet;
use std::fmt::Debug;
use std::path::{Path, PathBuf};

use hfcast_core::pipeline::{ColumnMap, ExperimentConfig};
use serde::Deserialize;

use crate::args::{DenoiserArgs, InputArgs, ModelArgs};
use crate::error::CliError;

pub const DEFAULT_SEED: u64 = 1;

/// Shape of the `--config` JSON file. Every key is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub columns: Option<ColumnMap>,
    pub experiment: Option<ExperimentConfig>,
    /// Experiment keys the file actually sets; the rest are defaults.
    #[serde(skip)]
    pub experiment_keys: BTreeSet<String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let bad =
            |e: serde_json::Error| CliError::Usage(format!("bad config {}: {e}", path.display()));
        let raw: serde_json::Value = serde_json::from_str(&text).map_err(bad)?;
        let keys = raw
            .get("experiment")
            .and_then(|e| e.as_object())
            .map(|o| o.keys().cloned().collect())
            .unwrap_or_default();
        let mut file: ConfigFile = serde_json::from_value(raw).map_err(bad)?;
        file.experiment_keys = keys;
        Ok(file)
    }
}

/// Resolved global settings plus the notices produced while resolving.
#[derive(Debug)]
pub struct Context {
    pub seed: u64,
    /// Whether the seed came from a flag or the config file.
    pub seed_given: bool,
    pub output_dir: PathBuf,
    pub file: ConfigFile,
    pub notices: Vec<String>,
}

fn pick<T: PartialEq + Debug + Clone>(
    name: &str,
    flag: Option<T>,
    from_file: Option<T>,
    fallback: T,
    notices: &mut Vec<String>,
) -> T {
    match (flag, from_file) {
        (Some(f), Some(c)) => {
            if f != c {
                notices.push(format!("--{name} {f:?} overrides config value {c:?}"));
            }
            f
        }
        (Some(f), None) => f,
        (None, Some(c)) => c,
        (None, None) => fallback,
    }
}

impl Context {
    pub fn new(
        seed: Option<u64>,
        config: Option<&Path>,
        output_dir: Option<PathBuf>,
    ) -> Result<Self, CliError> {
        let file = match config {
            Some(p) => ConfigFile::load(p)?,
            None => ConfigFile::default(),
        };
        let mut notices = Vec::new();
        let seed_given = seed.is_some() || file.seed.is_some();
        let seed = pick("seed", seed, file.seed, DEFAULT_SEED, &mut notices);
        let output_dir = pick(
            "output-dir",
            output_dir,
            file.output_dir.clone(),
            PathBuf::from("."),
            &mut notices,
        );
        Ok(Self {
            seed,
            seed_given,
            output_dir,
            file,
            notices,
        })
    }

    pub fn columns(&mut self, input: &InputArgs) -> ColumnMap {
        let mut cols = self.file.columns.clone().unwrap_or_default();
        let from_file = self.file.columns.is_some();
        for (field, header) in &input.columns {
            let slot = match field.as_str() {
                "timestamp" => &mut cols.timestamp,
                "open" => &mut cols.open,
                "high" => &mut cols.high,
                "low" => &mut cols.low,
                "close" => &mut cols.close,
                _ => &mut cols.volume,
            };
            if from_file && slot != header {
                self.notices.push(format!(
                    "--column {field}={header} overrides config value {slot:?}"
                ));
            }
            *slot = header.clone();
        }
        cols
    }

    fn base_experiment(&self) -> ExperimentConfig {
        self.file.experiment.clone().unwrap_or_default()
    }

    /// Overrides `slot` with the flag, noting a conflict only when the
    /// config file set `key` explicitly.
    fn apply<T: PartialEq + Debug + Clone>(
        &mut self,
        name: &str,
        key: &str,
        flag: Option<T>,
        slot: &mut T,
    ) {
        let current = slot.clone();
        let from_file = self
            .file
            .experiment_keys
            .contains(key)
            .then_some(current.clone());
        *slot = pick(name, flag, from_file, current, &mut self.notices);
    }

    fn apply_denoiser(&mut self, d: &DenoiserArgs, cfg: &mut ExperimentConfig) {
        self.apply(
            "levels",
            "wavelet_levels",
            d.levels,
            &mut cfg.wavelet_levels,
        );
        self.apply(
            "padding",
            "wavelet_padding",
            d.padding,
            &mut cfg.wavelet_padding,
        );
        self.apply("ssa-m", "ssa_embedding", d.ssa_m, &mut cfg.ssa_embedding);
        self.apply(
            "ssa-threshold",
            "ssa_threshold",
            d.ssa_threshold,
            &mut cfg.ssa_threshold,
        );
        self.apply(
            "ssa-center",
            "ssa_center",
            d.ssa_center.then_some(true),
            &mut cfg.ssa_center,
        );
        self.apply(
            "ssa-covariance",
            "ssa_covariance",
            d.ssa_covariance,
            &mut cfg.ssa_covariance,
        );
    }

    /// Config-file experiment settings overridden by flags, validated.
    pub fn experiment(&mut self, m: &ModelArgs) -> Result<ExperimentConfig, CliError> {
        let mut cfg = self.base_experiment();
        self.apply_denoiser(&m.denoiser, &mut cfg);
        self.apply("hidden", "hidden", m.hidden.clone(), &mut cfg.hidden);
        self.apply("epochs", "epochs", m.epochs, &mut cfg.epochs);
        self.apply(
            "batch-size",
            "batch_size",
            m.batch_size,
            &mut cfg.batch_size,
        );
        self.apply(
            "learning-rate",
            "learning_rate",
            m.learning_rate,
            &mut cfg.learning_rate,
        );
        self.apply("dropout", "dropout", m.dropout, &mut cfg.dropout);
        self.apply("max-lag", "max_lag", m.max_lag, &mut cfg.max_lag);
        let pacf_smoothed = m.pacf_on_smoothed.then_some(true);
        self.apply(
            "pacf-on-smoothed",
            "pacf_on_smoothed",
            pacf_smoothed,
            &mut cfg.pacf_on_smoothed,
        );
        let causal = m.causal_denoise.then_some(true);
        self.apply(
            "causal-denoise",
            "causal_denoise",
            causal,
            &mut cfg.causal_denoise,
        );
        self.apply("min-bars", "min_bars", m.min_bars, &mut cfg.min_bars);
        cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(cfg)
    }

    /// Denoiser settings only, for `denoise`.
    pub fn denoiser(&mut self, d: &DenoiserArgs) -> Result<ExperimentConfig, CliError> {
        let mut cfg = self.base_experiment();
        self.apply_denoiser(d, &mut cfg);
        cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(cfg)
    }

    pub fn max_lag(&mut self, flag: Option<usize>) -> usize {
        let mut lag = self.base_experiment().max_lag;
        self.apply("max-lag", "max_lag", flag, &mut lag);
        lag
    }

    pub fn out_path(&self, name: &str) -> PathBuf {
        self.output_dir.join(name)
    }
}
