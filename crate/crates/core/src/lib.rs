//! Denoising-plus-LSTM forecasting for high-frequency price bars.
//!
//! The crate is organised bottom-up:
//!
//! * [`wavelet`] – Mallat multilevel DWT with the Symlet-4 basis and
//!   zero-detail denoising.
//! * [`ssa`] – singular spectrum analysis (delay embedding, lag-covariance
//!   eigendecomposition, diagonal-averaging reconstruction).
//! * [`linalg`] – the small dense matrix type and the cyclic Jacobi
//!   eigensolver used by [`ssa`].
//! * [`lagstats`] – ACF / PACF (Durbin–Levinson) and input-lag selection.
//! * [`lstm`] – a from-scratch stacked LSTM regressor trained with BPTT and Adam.
//! * [`metrics`] – RMSE, MAE, MAPE and SDAPE.
//! * [`pipeline`] – bar ingestion, feature construction, the four-variant
//!   experiment runner and report rendering.

pub mod lagstats;
pub mod linalg;
pub mod lstm;
pub mod metrics;
pub mod pipeline;
pub mod ssa;
pub mod wavelet;
