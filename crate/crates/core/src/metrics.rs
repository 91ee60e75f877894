//! Forecast error measures: RMSE, MAE, MAPE and SDAPE.
//!
//! MAPE is reported on the percent scale (`x 100`). SDAPE is the population
//! standard deviation of the per-point absolute percentage errors and is
//! reported on the fraction scale. Both measures are also available on the
//! other scale through [`EvalReport`].

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("actual and predicted lengths differ ({actual} vs {predicted})")]
    LengthMismatch { actual: usize, predicted: usize },
    #[error("no predictions to evaluate")]
    EmptyInput,
    #[error("actual value at index {index} is zero; percentage errors are undefined")]
    ZeroActual { index: usize },
}

fn check(actual: &[f64], predicted: &[f64]) -> Result<(), MetricsError> {
    if actual.len() != predicted.len() {
        return Err(MetricsError::LengthMismatch {
            actual: actual.len(),
            predicted: predicted.len(),
        });
    }
    if actual.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    Ok(())
}

fn check_nonzero(actual: &[f64]) -> Result<(), MetricsError> {
    match actual.iter().position(|&y| y == 0.0) {
        Some(index) => Err(MetricsError::ZeroActual { index }),
        None => Ok(()),
    }
}

pub fn rmse(actual: &[f64], predicted: &[f64]) -> Result<f64, MetricsError> {
    check(actual, predicted)?;
    let sse: f64 = actual
        .iter()
        .zip(predicted)
        .map(|(y, p)| (y - p).powi(2))
        .sum();
    Ok((sse / actual.len() as f64).sqrt())
}

pub fn mae(actual: &[f64], predicted: &[f64]) -> Result<f64, MetricsError> {
    check(actual, predicted)?;
    let sae: f64 = actual
        .iter()
        .zip(predicted)
        .map(|(y, p)| (y - p).abs())
        .sum();
    Ok(sae / actual.len() as f64)
}

/// Per-point absolute percentage errors `|y - p| / |y|` (fraction scale).
pub fn absolute_percentage_errors(
    actual: &[f64],
    predicted: &[f64],
) -> Result<Vec<f64>, MetricsError> {
    check(actual, predicted)?;
    check_nonzero(actual)?;
    Ok(actual
        .iter()
        .zip(predicted)
        .map(|(y, p)| ((y - p) / y).abs())
        .collect())
}

/// Mean absolute percentage error on the fraction scale.
pub fn mape_fraction(actual: &[f64], predicted: &[f64]) -> Result<f64, MetricsError> {
    let ape = absolute_percentage_errors(actual, predicted)?;
    Ok(ape.iter().sum::<f64>() / ape.len() as f64)
}

/// Mean absolute percentage error in percent.
pub fn mape(actual: &[f64], predicted: &[f64]) -> Result<f64, MetricsError> {
    Ok(mape_fraction(actual, predicted)? * 100.0)
}

/// Standard deviation of the absolute percentage errors (fraction scale),
/// taken about their own mean.
pub fn sdape(actual: &[f64], predicted: &[f64]) -> Result<f64, MetricsError> {
    let ape = absolute_percentage_errors(actual, predicted)?;
    let n = ape.len() as f64;
    let mean = ape.iter().sum::<f64>() / n;
    Ok((ape.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / n).sqrt())
}

/// All four measures for one set of predictions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub rmse: f64,
    pub mae: f64,
    /// Percent scale.
    pub mape: f64,
    pub mape_fraction: f64,
    /// Fraction scale.
    pub sdape: f64,
    pub sdape_percent: f64,
    pub n: usize,
}

impl EvalReport {
    pub fn compute(actual: &[f64], predicted: &[f64]) -> Result<Self, MetricsError> {
        let mape_fraction = mape_fraction(actual, predicted)?;
        let sdape = sdape(actual, predicted)?;
        Ok(Self {
            rmse: rmse(actual, predicted)?,
            mae: mae(actual, predicted)?,
            mape: mape_fraction * 100.0,
            mape_fraction,
            sdape,
            sdape_percent: sdape * 100.0,
            n: actual.len(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_evaluated_values() {
        let (y, p) = ([1.0, 2.0], [2.0, 4.0]);
        assert!((rmse(&y, &p).unwrap() - 2.5f64.sqrt()).abs() < 1e-12);
        assert!((mae(&y, &p).unwrap() - 1.5).abs() < 1e-12);
        assert_eq!(rmse(&[0.0; 3], &[1.0; 3]).unwrap(), 1.0);
        assert!((mape(&[100.0], &[99.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!((sdape(&[100.0, 100.0], &[99.0, 102.0]).unwrap() - 0.005).abs() < 1e-12);
    }

    #[test]
    fn identical_vectors_score_zero() {
        let y = [3.0, -1.0, 7.5];
        let r = EvalReport::compute(&y, &y).unwrap();
        assert_eq!((r.rmse, r.mae, r.mape, r.sdape), (0.0, 0.0, 0.0, 0.0));
        assert_eq!(r.n, 3);
    }

    #[test]
    fn single_prediction_has_zero_sdape() {
        assert_eq!(sdape(&[50.0], &[47.0]).unwrap(), 0.0);
    }

    #[test]
    fn uniform_relative_error_has_zero_sdape() {
        let y = [10.0, 250.0, 3.5, 1e4];
        let p: Vec<f64> = y.iter().map(|v| v * 1.01).collect();
        assert!(sdape(&y, &p).unwrap() < 1e-12);
    }

    #[test]
    fn errors() {
        assert_eq!(
            rmse(&[1.0], &[1.0, 2.0]),
            Err(MetricsError::LengthMismatch {
                actual: 1,
                predicted: 2
            })
        );
        assert_eq!(mae(&[], &[]), Err(MetricsError::EmptyInput));
        assert_eq!(
            mape(&[1.0, 0.0], &[1.0, 1.0]),
            Err(MetricsError::ZeroActual { index: 1 })
        );
        assert_eq!(
            sdape(&[0.0], &[1.0]),
            Err(MetricsError::ZeroActual { index: 0 })
        );
        assert!(EvalReport::compute(&[0.0], &[1.0]).is_err());
    }

    #[test]
    fn report_scales_agree() {
        let r = EvalReport::compute(&[100.0, 100.0], &[99.0, 102.0]).unwrap();
        assert!((r.mape - 1.5).abs() < 1e-12);
        assert!((r.mape_fraction - 0.015).abs() < 1e-15);
        assert!((r.sdape_percent - 0.5).abs() < 1e-12);
    }
}
