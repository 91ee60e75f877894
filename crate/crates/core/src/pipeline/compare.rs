//! Percentage improvement of each variant over the plain LSTM.

use serde::{Deserialize, Serialize};

use super::experiment::{Denoiser, Horizon, RunResult};
use super::PipelineError;

/// The four error measures of one model. MAPE and SDAPE are on the
/// fraction scale.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelScore {
    pub variant: Denoiser,
    pub horizon: Horizon,
    pub seed: u64,
    pub data_hash: String,
    pub rmse: f64,
    pub mae: f64,
    pub mape: f64,
    pub sdape: f64,
}

impl From<&RunResult> for ModelScore {
    fn from(r: &RunResult) -> Self {
        Self {
            variant: r.variant,
            horizon: r.horizon,
            seed: r.seed,
            data_hash: r.data_hash.clone(),
            rmse: r.metrics.rmse,
            mae: r.metrics.mae,
            mape: r.metrics.mape_fraction,
            sdape: r.metrics.sdape,
        }
    }
}

/// `(baseline - variant) / baseline * 100`; `None` for a zero or
/// non-finite baseline.
pub fn improvement_pct(baseline: f64, variant: f64) -> Option<f64> {
    if baseline == 0.0 || !baseline.is_finite() || !variant.is_finite() {
        None
    } else {
        Some((baseline - variant) / baseline * 100.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Improvement {
    pub rmse: Option<f64>,
    pub mae: Option<f64>,
    pub mape: Option<f64>,
    pub sdape: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub variant: Denoiser,
    pub label: String,
    pub rmse: f64,
    pub mae: f64,
    pub mape: f64,
    pub sdape: f64,
    pub improvement: Improvement,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub horizon: Horizon,
    pub seed: u64,
    pub data_hash: String,
    /// LSTM, Dropout-LSTM, SSA-LSTM, WT-LSTM (those present).
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonTable {
    pub fn row(&self, variant: Denoiser) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.variant == variant)
    }
}

/// Compares scores that share horizon, seed and data against the
/// `Denoiser::None` baseline among them.
pub fn compare_models(scores: &[ModelScore]) -> Result<ComparisonTable, PipelineError> {
    let first = scores
        .first()
        .ok_or(PipelineError::MismatchedRuns("no scores to compare".into()))?;
    for s in scores {
        if s.horizon != first.horizon || s.seed != first.seed || s.data_hash != first.data_hash {
            return Err(PipelineError::MismatchedRuns(format!(
                "{} ({}, seed {}) does not match {} ({}, seed {})",
                s.variant, s.horizon, s.seed, first.variant, first.horizon, first.seed
            )));
        }
    }
    let mut sorted: Vec<&ModelScore> = scores.iter().collect();
    sorted.sort_by_key(|s| s.variant);
    if let Some(w) = sorted.windows(2).find(|w| w[0].variant == w[1].variant) {
        return Err(PipelineError::MismatchedRuns(format!(
            "{} appears twice",
            w[0].variant
        )));
    }
    let base = sorted.iter().find(|s| s.variant == Denoiser::None).ok_or(
        PipelineError::MissingBaseline {
            horizon: first.horizon,
            seed: first.seed,
        },
    )?;
    let rows = sorted
        .iter()
        .map(|s| ComparisonRow {
            variant: s.variant,
            label: s.variant.label().to_string(),
            rmse: s.rmse,
            mae: s.mae,
            mape: s.mape,
            sdape: s.sdape,
            improvement: Improvement {
                rmse: improvement_pct(base.rmse, s.rmse),
                mae: improvement_pct(base.mae, s.mae),
                mape: improvement_pct(base.mape, s.mape),
                sdape: improvement_pct(base.sdape, s.sdape),
            },
        })
        .collect();
    Ok(ComparisonTable {
        horizon: first.horizon,
        seed: first.seed,
        data_hash: first.data_hash.clone(),
        rows,
    })
}

/// Groups scores by (seed, horizon) and compares every group that has a
/// baseline. Groups are ordered by seed, then horizon.
pub fn compare_all(scores: &[ModelScore]) -> Vec<ComparisonTable> {
    let mut keys: Vec<(u64, Horizon)> = scores.iter().map(|s| (s.seed, s.horizon)).collect();
    keys.sort();
    keys.dedup();
    keys.into_iter()
        .filter_map(|(seed, horizon)| {
            let group: Vec<ModelScore> = scores
                .iter()
                .filter(|s| s.seed == seed && s.horizon == horizon)
                .cloned()
                .collect();
            compare_models(&group).ok()
        })
        .collect()
}
