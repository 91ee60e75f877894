//! Singular spectrum analysis.
//!
//! A series `x` of length `n` is embedded into the `m x (n - m + 1)` delay
//! (Hankel) matrix `X` whose column `c` is the window `x[c..c + m]`. The
//! `m x m` lag-covariance matrix is `S = X X^T / (n - m + 1)` by default;
//! the Toeplitz estimate built from `s(d) = (1/n) sum_t x[t] x[t + d]` is
//! available through [`CovarianceEstimator::Toeplitz`]. The eigenvectors
//! `E^k` of `S` (sorted by descending eigenvalue) define the principal
//! components
//!
//! ```text
//! a_i^k = sum_j x[i + j] E^k_j,    0 <= i <= n - m
//! ```
//!
//! and a subset of components is mapped back to a series by diagonal
//! averaging: every window containing `t` contributes one estimate of
//! `x[t]`, and the estimates are averaged.
//!
//! By default the series is not mean-centred, so the level of a price series
//! dominates the first component. Centring is available through
//! [`SsaOptions::center`]; the mean is then added back on reconstruction.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{dot, householder_basis, jacobi_eigen, LinalgError, Matrix};

pub const DEFAULT_EMBEDDING: usize = 10;
pub const DEFAULT_THRESHOLD: f64 = 0.9999;

#[derive(Debug, Error, PartialEq)]
pub enum SsaError {
    #[error("embedding dimension {m} must be at least 1 and below n/2 for a series of length {n}")]
    EmbeddingTooLarge { m: usize, n: usize },
    #[error("component selection is empty")]
    EmptySelection,
    #[error("component index {index} is outside 1..={m}")]
    IndexOutOfRange { index: usize, m: usize },
    #[error("threshold must lie in (0, 1], got {0}")]
    InvalidThreshold(f64),
    #[error("input contains non-finite values")]
    NonFinite,
    #[error(transparent)]
    Eigen(#[from] LinalgError),
}

/// How the lag-covariance matrix is estimated from the delay matrix.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CovarianceEstimator {
    /// `X X^T / k`. Exactly rank `r` for a series spanned by `r` components.
    #[default]
    Trajectory,
    /// Toeplitz matrix of biased autocovariances. The `(1 - d/n)` taper
    /// leaks a small amount of energy out of the leading components.
    Toeplitz,
}

impl std::str::FromStr for CovarianceEstimator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "trajectory" => Ok(Self::Trajectory),
            "toeplitz" => Ok(Self::Toeplitz),
            other => Err(format!(
                "unknown covariance estimator `{other}` (expected trajectory|toeplitz)"
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SsaOptions {
    /// Subtract the series mean before embedding.
    pub center: bool,
    #[serde(default)]
    pub covariance: CovarianceEstimator,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SsaDecomposition {
    pub embedding_dim: usize,
    /// Descending eigenvalues of the lag-covariance matrix.
    pub eigenvalues: Vec<f64>,
    pub eigenvalue_shares: Vec<f64>,
    /// Column `k` is the eigenvector `E^{k+1}`.
    pub eigenvectors: Matrix,
    /// Row `i`, column `k` is `a_i^{k+1}`; `n - m + 1` rows.
    pub principal_components: Matrix,
    pub covariance: Matrix,
    pub original_length: usize,
    /// Mean removed before embedding (zero when not centred).
    pub mean: f64,
    /// Set when the (possibly centred) series is constant; the first
    /// eigenvector is then the normalised all-ones vector and carries the
    /// whole share.
    pub degenerate: bool,
}

fn check_embedding(n: usize, m: usize) -> Result<(), SsaError> {
    if m == 0 || 2 * m >= n {
        return Err(SsaError::EmbeddingTooLarge { m, n });
    }
    Ok(())
}

/// The `m x (n - m + 1)` trajectory matrix: entry `(r, c)` is `x[r + c]`.
pub fn delay_matrix(x: &[f64], m: usize) -> Result<Matrix, SsaError> {
    let n = x.len();
    check_embedding(n, m)?;
    Ok(Matrix::from_fn(m, n - m + 1, |r, c| x[r + c]))
}

/// Toeplitz lag-covariance matrix with `s(d) = (1/n) sum_{t < n-d} x[t] x[t+d]`.
pub fn lag_covariance(x: &[f64], m: usize) -> Matrix {
    let n = x.len();
    let s: Vec<f64> = (0..m)
        .map(|d| x.iter().zip(&x[d..]).map(|(a, b)| a * b).sum::<f64>() / n as f64)
        .collect();
    Matrix::from_fn(m, m, |r, c| s[r.abs_diff(c)])
}

/// `X X^T / (n - m + 1)` for the delay matrix `X`.
pub fn trajectory_covariance(x: &[f64], m: usize) -> Matrix {
    let k = x.len() + 1 - m;
    let mut s = Matrix::zeros(m, m);
    for r in 0..m {
        for c in r..m {
            let v = dot(&x[r..r + k], &x[c..c + k]) / k as f64;
            s[(r, c)] = v;
            s[(c, r)] = v;
        }
    }
    s
}

pub fn ssa_decompose(
    x: &[f64],
    m: usize,
    options: SsaOptions,
) -> Result<SsaDecomposition, SsaError> {
    let n = x.len();
    check_embedding(n, m)?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(SsaError::NonFinite);
    }

    let mean = if options.center {
        x.iter().sum::<f64>() / n as f64
    } else {
        0.0
    };
    let series: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let covariance = match options.covariance {
        CovarianceEstimator::Trajectory => trajectory_covariance(&series, m),
        CovarianceEstimator::Toeplitz => lag_covariance(&series, m),
    };

    let constant = series.iter().all(|&v| v == series[0]);
    let (eigenvalues, eigenvectors, degenerate) = if constant || covariance.trace() <= 0.0 {
        let unit = vec![1.0 / (m as f64).sqrt(); m];
        let mut values = vec![0.0; m];
        values[0] = covariance.trace();
        (values, householder_basis(&unit), true)
    } else {
        let eig = jacobi_eigen(&covariance)?;
        (eig.values, eig.vectors, false)
    };

    let total: f64 = eigenvalues.iter().sum();
    let eigenvalue_shares = if degenerate || total <= 0.0 {
        let mut s = vec![0.0; m];
        s[0] = 1.0;
        s
    } else {
        eigenvalues.iter().map(|l| l / total).collect()
    };

    let k = n - m + 1;
    let columns: Vec<Vec<f64>> = (0..m).map(|c| eigenvectors.column(c)).collect();
    let mut principal_components = Matrix::zeros(k, m);
    for i in 0..k {
        let window = &series[i..i + m];
        for (c, e) in columns.iter().enumerate() {
            principal_components[(i, c)] = dot(window, e);
        }
    }

    Ok(SsaDecomposition {
        embedding_dim: m,
        eigenvalues,
        eigenvalue_shares,
        eigenvectors,
        principal_components,
        covariance,
        original_length: n,
        mean,
        degenerate,
    })
}

/// Diagonal-averaged reconstruction from the selected components
/// (1-based indices). The removed mean, if any, is added back.
pub fn ssa_reconstruct(d: &SsaDecomposition, selected: &[usize]) -> Result<Vec<f64>, SsaError> {
    let m = d.embedding_dim;
    if selected.is_empty() {
        return Err(SsaError::EmptySelection);
    }
    if let Some(&index) = selected.iter().find(|&&i| i == 0 || i > m) {
        return Err(SsaError::IndexOutOfRange { index, m });
    }
    let mut picked: Vec<usize> = selected.iter().map(|i| i - 1).collect();
    picked.sort_unstable();
    picked.dedup();

    let n = d.original_length;
    let k = n - m + 1;
    let mut sums = vec![0.0; n];
    let mut counts = vec![0usize; n];
    for i in 0..k {
        for j in 0..m {
            let est: f64 = picked
                .iter()
                .map(|&c| d.principal_components[(i, c)] * d.eigenvectors[(j, c)])
                .sum();
            sums[i + j] += est;
            counts[i + j] += 1;
        }
    }
    Ok(sums
        .iter()
        .zip(&counts)
        .map(|(s, &c)| s / c as f64 + d.mean)
        .collect())
}

/// Smallest leading prefix `{1..k}` whose cumulative share reaches
/// `threshold`. Falls back to all components if rounding keeps the total
/// just below the threshold.
pub fn select_components(d: &SsaDecomposition, threshold: f64) -> Result<Vec<usize>, SsaError> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(SsaError::InvalidThreshold(threshold));
    }
    let mut cumulative = 0.0;
    for (i, share) in d.eigenvalue_shares.iter().enumerate() {
        cumulative += share;
        if cumulative >= threshold {
            return Ok((1..=i + 1).collect());
        }
    }
    Ok((1..=d.embedding_dim).collect())
}

/// Decompose, select by cumulative share and reconstruct.
pub fn ssa_denoise(
    x: &[f64],
    m: usize,
    threshold: f64,
    options: SsaOptions,
) -> Result<(Vec<f64>, SsaDecomposition, Vec<usize>), SsaError> {
    let d = ssa_decompose(x, m, options)?;
    let selected = select_components(&d, threshold)?;
    // A constant series lives entirely in the first component; return it
    // bit-exact rather than through the averaging round trip.
    let smoothed = if d.degenerate && selected.contains(&1) {
        x.to_vec()
    } else {
        ssa_reconstruct(&d, &selected)?
    };
    Ok((smoothed, d, selected))
}
