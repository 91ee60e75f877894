//! Autocorrelation, partial autocorrelation and input-lag selection.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_MAX_LAG: usize = 20;

/// Two-sided 95% normal quantile used for the PACF significance band.
const Z_95: f64 = 1.96;

#[derive(Debug, Error, PartialEq)]
pub enum LagError {
    #[error("max lag {max_lag} must be at least 1 and below n/2 for a series of length {n}")]
    LagTooLarge { max_lag: usize, n: usize },
    #[error("series has zero variance")]
    DegenerateSeries,
    #[error("input contains non-finite values")]
    NonFinite,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PacfResult {
    /// PACF indexed by lag, `values[0] == 1`.
    pub values: Vec<f64>,
    /// `1.96 / sqrt(n)`.
    pub confidence_bound: f64,
    pub selected_lag: usize,
}

impl PacfResult {
    pub fn max_lag(&self) -> usize {
        self.values.len() - 1
    }

    pub fn is_significant(&self, lag: usize) -> bool {
        self.values[lag].abs() > self.confidence_bound
    }
}

fn check(x: &[f64], max_lag: usize) -> Result<(), LagError> {
    let n = x.len();
    if max_lag == 0 || 2 * max_lag >= n {
        return Err(LagError::LagTooLarge { max_lag, n });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(LagError::NonFinite);
    }
    Ok(())
}

/// Biased sample autocorrelation of the mean-centred series for lags
/// `0..=max_lag`.
pub fn acf(x: &[f64], max_lag: usize) -> Result<Vec<f64>, LagError> {
    check(x, max_lag)?;
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let centred: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let gamma0 = centred.iter().map(|v| v * v).sum::<f64>() / n;
    if gamma0 == 0.0 || x.iter().all(|&v| v == x[0]) {
        return Err(LagError::DegenerateSeries);
    }
    Ok((0..=max_lag)
        .map(|d| {
            let gamma = centred
                .iter()
                .zip(&centred[d..])
                .map(|(a, b)| a * b)
                .sum::<f64>()
                / n;
            gamma / gamma0
        })
        .collect())
}

/// Durbin–Levinson recursion on an autocorrelation sequence.
///
/// Returns the partial autocorrelations `phi_kk` for `k = 0..r.len()` (with
/// `phi_00 = 1`) and the AR coefficients of the highest order fitted.
pub fn durbin_levinson(r: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let max_lag = r.len() - 1;
    let mut pacf = vec![1.0; max_lag + 1];
    let mut phi: Vec<f64> = Vec::with_capacity(max_lag);
    for k in 1..=max_lag {
        let num = r[k]
            - phi
                .iter()
                .enumerate()
                .map(|(j, p)| p * r[k - 1 - j])
                .sum::<f64>();
        let den = 1.0
            - phi
                .iter()
                .enumerate()
                .map(|(j, p)| p * r[j + 1])
                .sum::<f64>();
        let phi_kk = if den.abs() < f64::MIN_POSITIVE {
            0.0
        } else {
            num / den
        };
        let prev = phi.clone();
        for j in 0..phi.len() {
            phi[j] = prev[j] - phi_kk * prev[k - 2 - j];
        }
        phi.push(phi_kk);
        pacf[k] = phi_kk;
    }
    (pacf, phi)
}

/// Partial autocorrelation with lag selection.
///
/// The selected lag is the end of the leading run of significant lags:
/// the largest `k` such that every lag `1..=k` lies outside the
/// `1.96/sqrt(n)` band. If lag 1 is not significant the result is 1.
pub fn pacf(x: &[f64], max_lag: usize) -> Result<PacfResult, LagError> {
    let r = acf(x, max_lag)?;
    let (values, _) = durbin_levinson(&r);
    let confidence_bound = Z_95 / (x.len() as f64).sqrt();
    let selected_lag = values[1..]
        .iter()
        .take_while(|v| v.abs() > confidence_bound)
        .count()
        .max(1);
    Ok(PacfResult {
        values,
        confidence_bound,
        selected_lag,
    })
}

/// Largest lag whose PACF is outside the band, 1 if none is. Exposed for
/// comparison with [`pacf`]'s leading-run rule; it tends to pick up spurious
/// isolated lags when `max_lag` is large.
pub fn largest_significant_lag(result: &PacfResult) -> usize {
    (1..=result.max_lag())
        .rev()
        .find(|&k| result.is_significant(k))
        .unwrap_or(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn acf_starts_at_one() {
        let x: Vec<f64> = (0..50).map(|i| ((i * 7) % 11) as f64).collect();
        let r = acf(&x, 5).unwrap();
        assert_eq!(r[0], 1.0);
        assert!(r.iter().all(|v| v.abs() <= 1.0 + 1e-12));
    }

    #[test]
    fn lag_bounds_and_degenerate_input() {
        assert_eq!(
            acf(&[1.0; 10], 5),
            Err(LagError::LagTooLarge { max_lag: 5, n: 10 })
        );
        assert_eq!(
            acf(&[1.0, 2.0, 3.0], 0),
            Err(LagError::LagTooLarge { max_lag: 0, n: 3 })
        );
        assert_eq!(acf(&[4.0; 30], 3), Err(LagError::DegenerateSeries));
        assert_eq!(pacf(&[4.0; 30], 3), Err(LagError::DegenerateSeries));
    }

    #[test]
    fn durbin_levinson_on_exact_ar1_acf() {
        // rho(d) = 0.6^d exactly: PACF is 0.6 then zero
        let r: Vec<f64> = (0..6).map(|d| 0.6f64.powi(d)).collect();
        let (p, phi) = durbin_levinson(&r);
        assert!((p[1] - 0.6).abs() < 1e-14);
        for v in &p[2..] {
            assert!(v.abs() < 1e-14);
        }
        assert!((phi[0] - 0.6).abs() < 1e-14);
    }

    #[test]
    fn durbin_levinson_on_exact_ar2_acf() {
        // AR(2) with phi = (0.5, 0.3): rho1 = phi1 / (1 - phi2), rho_k = phi1 rho_{k-1} + phi2 rho_{k-2}
        let (p1, p2) = (0.5, 0.3);
        let mut r = vec![1.0, p1 / (1.0 - p2)];
        for k in 2..8 {
            r.push(p1 * r[k - 1] + p2 * r[k - 2]);
        }
        let (pacf, phi) = durbin_levinson(&r);
        assert!((pacf[2] - 0.3).abs() < 1e-12);
        for v in &pacf[3..] {
            assert!(v.abs() < 1e-12);
        }
        assert!((phi[0] - 0.5).abs() < 1e-12 && (phi[1] - 0.3).abs() < 1e-12);
    }

    #[test]
    fn selection_rules() {
        let result = PacfResult {
            values: vec![1.0, 0.8, 0.3, 0.01, 0.2, 0.0],
            confidence_bound: 0.1,
            selected_lag: 2,
        };
        assert_eq!(largest_significant_lag(&result), 4);
        let none = PacfResult {
            values: vec![1.0, 0.01, 0.02],
            confidence_bound: 0.1,
            selected_lag: 1,
        };
        assert_eq!(largest_significant_lag(&none), 1);
    }
}
