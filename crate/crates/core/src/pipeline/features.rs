//! Lagged feature windows and train-fitted min-max scaling.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::bars::BarSeries;
use super::PipelineError;
use crate::lstm::{Sample, Sequence};

/// Per-bar inputs fed to the network.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureSet {
    /// `(open, high, low, close)`.
    Ohlc,
    /// `(smoothed close, volume)`.
    SmoothedVolume,
}

impl FeatureSet {
    pub fn columns(self) -> &'static [&'static str] {
        match self {
            FeatureSet::Ohlc => &["open", "high", "low", "close"],
            FeatureSet::SmoothedVolume => &["smoothed_close", "volume"],
        }
    }

    /// Column holding the price series the features were built from.
    pub fn price_column(self) -> usize {
        match self {
            FeatureSet::Ohlc => 3,
            FeatureSet::SmoothedVolume => 0,
        }
    }
}

/// Sample `i` covers feature rows `i..i + lag` and targets the close of
/// bar `i + lag`.
#[derive(Clone, Debug, PartialEq)]
pub struct WindowedDataset {
    pub feature_set: FeatureSet,
    pub lag: usize,
    /// Unscaled feature rows, one per bar.
    pub rows: Vec<Vec<f64>>,
    /// Unscaled next-bar closes, one per sample.
    pub targets: Vec<f64>,
    /// Bar index of each target.
    pub target_index: Vec<usize>,
}

pub fn build_features(
    bars: &BarSeries,
    smoothed: Option<&[f64]>,
    lag: usize,
) -> Result<WindowedDataset, PipelineError> {
    let n = bars.len();
    if lag == 0 || lag >= n {
        return Err(PipelineError::SeriesTooShortForLag { lag, len: n });
    }
    let (feature_set, rows): (FeatureSet, Vec<Vec<f64>>) = match smoothed {
        None => (
            FeatureSet::Ohlc,
            (0..n)
                .map(|i| vec![bars.open[i], bars.high[i], bars.low[i], bars.close[i]])
                .collect(),
        ),
        Some(s) => {
            if s.len() != n {
                return Err(PipelineError::LengthMismatch {
                    expected: n,
                    found: s.len(),
                });
            }
            (
                FeatureSet::SmoothedVolume,
                s.iter()
                    .zip(&bars.volume)
                    .map(|(&x, &v)| vec![x, v])
                    .collect(),
            )
        }
    };
    Ok(WindowedDataset {
        feature_set,
        lag,
        rows,
        targets: bars.close[lag..].to_vec(),
        target_index: (lag..n).collect(),
    })
}

/// Affine map of `[min, max]` onto `[0, 1]`. A constant column maps to 0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinMax {
    pub min: f64,
    pub max: f64,
}

impl MinMax {
    pub fn fit<I: IntoIterator<Item = f64>>(values: I) -> Self {
        let (min, max) = values
            .into_iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            });
        Self { min, max }
    }

    fn range(&self) -> f64 {
        self.max - self.min
    }

    pub fn transform(&self, v: f64) -> f64 {
        if self.range() > 0.0 {
            (v - self.min) / self.range()
        } else {
            0.0
        }
    }

    pub fn inverse(&self, v: f64) -> f64 {
        if self.range() > 0.0 {
            self.min + v * self.range()
        } else {
            self.min
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scaling {
    pub features: Vec<MinMax>,
    pub target: MinMax,
}

impl WindowedDataset {
    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn features(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    /// Fits scaling on the first `train_samples` samples only: the feature
    /// rows inside their windows and their targets.
    pub fn fit_scaling(&self, train_samples: usize) -> Scaling {
        let train_rows = &self.rows[..train_samples + self.lag - 1];
        let features = (0..self.features())
            .map(|c| MinMax::fit(train_rows.iter().map(|r| r[c])))
            .collect();
        let target = MinMax::fit(self.targets[..train_samples].iter().copied());
        Scaling { features, target }
    }

    pub fn samples(&self, range: Range<usize>, scaling: &Scaling) -> Vec<Sample> {
        range
            .map(|i| {
                let window: Vec<Vec<f64>> = self.rows[i..i + self.lag]
                    .iter()
                    .map(|r| {
                        r.iter()
                            .zip(&scaling.features)
                            .map(|(v, s)| s.transform(*v))
                            .collect()
                    })
                    .collect();
                Sample {
                    input: Sequence::from_rows(&window).expect("rows have equal width"),
                    target: scaling.target.transform(self.targets[i]),
                }
            })
            .collect()
    }

    /// Price column as handed to the builder.
    pub fn price_series(&self) -> Vec<f64> {
        let c = self.feature_set.price_column();
        self.rows.iter().map(|r| r[c]).collect()
    }
}
