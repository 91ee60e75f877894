//! Multilevel discrete wavelet transform (Mallat cascade) and zero-detail
//! denoising.
//!
//! Each level convolves the current approximation with the lowpass and
//! highpass analysis filters and keeps every second output; only the
//! lowpass branch is decomposed further. Reconstruction runs the cascade in
//! reverse (upsample, filter with the synthesis pair, sum), so that
//!
//! ```text
//! x = A_l + D_l + D_{l-1} + ... + D_1
//! ```
//!
//! where each term is the synthesis of a single band. Denoising keeps only
//! `A_l`.
//!
//! Two boundary modes are supported. [`Padding::Symmetric`] reflects the
//! signal about its end samples (half-sample symmetry) and produces
//! `floor((n + F - 1) / 2)` coefficients per band, which makes the transform
//! redundant but free of wrap-around artifacts on trending data.
//! [`Padding::Periodic`] wraps the signal circularly and produces
//! `ceil(n / 2)` coefficients per band; for even lengths it is orthonormal.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Upper bound on decomposition depth.
pub const MAX_LEVELS: usize = 8;

/// Default decomposition depth for price series.
pub const DEFAULT_LEVELS: usize = 4;

/// Symlet-4 decomposition lowpass taps, obtained by spectral factorisation
/// of the Daubechies product filter (least-asymmetric root selection) and
/// rounded to the nearest double.
const SYM4_LOWPASS_DEC: [f64; 8] = [
    -0.07576571478950221,
    -0.029635527646002493,
    0.497618667632775,
    0.8037387518051321,
    0.29785779560530606,
    -0.09921954357663353,
    -0.012603967262031304,
    0.032223100604051466,
];

#[derive(Debug, Error, PartialEq)]
pub enum WaveletError {
    #[error("series of length {len} is too short: need at least {required} samples")]
    SeriesTooShort { len: usize, required: usize },
    #[error("decomposition levels must be in 1..={MAX_LEVELS}, got {0}")]
    InvalidLevels(usize),
    #[error("band lengths are inconsistent with {levels} levels over {original_length} samples: {detail}")]
    ShapeMismatch {
        levels: usize,
        original_length: usize,
        detail: String,
    },
    #[error("input contains non-finite values")]
    NonFinite,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Padding {
    #[default]
    Symmetric,
    Periodic,
}

impl std::str::FromStr for Padding {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "symmetric" | "sym" => Ok(Padding::Symmetric),
            "periodic" | "per" | "periodization" => Ok(Padding::Periodic),
            other => Err(format!(
                "unknown padding mode `{other}` (expected symmetric|periodic)"
            )),
        }
    }
}

impl std::fmt::Display for Padding {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Padding::Symmetric => f.write_str("symmetric"),
            Padding::Periodic => f.write_str("periodic"),
        }
    }
}

/// An orthogonal two-channel filter bank.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveletFilter {
    pub name: String,
    pub lowpass_dec: Vec<f64>,
    pub highpass_dec: Vec<f64>,
    pub lowpass_rec: Vec<f64>,
    pub highpass_rec: Vec<f64>,
}

impl WaveletFilter {
    pub fn sym4() -> Self {
        Self::from_lowpass("sym4", &SYM4_LOWPASS_DEC)
    }

    /// Builds the quadrature-mirror bank from orthogonal lowpass analysis
    /// taps: `g[j] = (-1)^(j+1) h[F-1-j]`, synthesis filters are the
    /// time-reversed analysis filters.
    pub fn from_lowpass(name: &str, lowpass_dec: &[f64]) -> Self {
        let f = lowpass_dec.len();
        let highpass_dec: Vec<f64> = (0..f)
            .map(|j| {
                let sign = if j % 2 == 0 { -1.0 } else { 1.0 };
                sign * lowpass_dec[f - 1 - j]
            })
            .collect();
        let lowpass_rec = lowpass_dec.iter().rev().copied().collect();
        let highpass_rec = highpass_dec.iter().rev().copied().collect();
        Self {
            name: name.to_string(),
            lowpass_dec: lowpass_dec.to_vec(),
            highpass_dec,
            lowpass_rec,
            highpass_rec,
        }
    }

    pub fn len(&self) -> usize {
        self.lowpass_dec.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lowpass_dec.is_empty()
    }

    /// Number of coefficients one analysis step produces from `n` samples.
    pub fn band_len(&self, n: usize, padding: Padding) -> usize {
        match padding {
            Padding::Symmetric => (n + self.len() - 1) / 2,
            Padding::Periodic => n.div_ceil(2),
        }
    }

    /// Input length at every level: `lens[0] = n`, `lens[k+1]` is the band
    /// length produced from `lens[k]`.
    fn level_lengths(&self, n: usize, levels: usize, padding: Padding) -> Vec<usize> {
        let mut lens = Vec::with_capacity(levels + 1);
        lens.push(n);
        for k in 0..levels {
            lens.push(self.band_len(lens[k], padding));
        }
        lens
    }
}

impl Default for WaveletFilter {
    fn default() -> Self {
        Self::sym4()
    }
}

/// Approximation band `C_l` plus detail bands `D_1..D_l` (index 0 is the
/// finest, `D_1`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveletDecomposition {
    pub approximation: Vec<f64>,
    pub details: Vec<Vec<f64>>,
    pub levels: usize,
    pub original_length: usize,
    pub padding: Padding,
}

impl WaveletDecomposition {
    pub fn coefficient_count(&self) -> usize {
        self.approximation.len() + self.details.iter().map(Vec::len).sum::<usize>()
    }

    /// Sum of squared coefficients over all bands.
    pub fn energy(&self) -> f64 {
        band_energy(&self.approximation) + self.details.iter().map(|d| band_energy(d)).sum::<f64>()
    }

    /// Per-band energies: `[A_l, D_l, D_{l-1}, ..., D_1]`.
    pub fn band_energies(&self) -> Vec<(String, f64)> {
        let mut out = vec![(
            format!("A{}", self.levels),
            band_energy(&self.approximation),
        )];
        for (k, d) in self.details.iter().enumerate().rev() {
            out.push((format!("D{}", k + 1), band_energy(d)));
        }
        out
    }

    pub fn with_zeroed_details(mut self) -> Self {
        for d in &mut self.details {
            d.iter_mut().for_each(|v| *v = 0.0);
        }
        self
    }
}

fn band_energy(band: &[f64]) -> f64 {
    band.iter().map(|v| v * v).sum()
}

/// Half-sample symmetric reflection of an arbitrary index into `[0, n)`.
#[inline]
fn reflect(idx: isize, n: usize) -> usize {
    let period = 2 * n as isize;
    let k = idx.rem_euclid(period) as usize;
    if k < n {
        k
    } else {
        2 * n - 1 - k
    }
}

fn analysis_step(x: &[f64], filter: &WaveletFilter, padding: Padding) -> (Vec<f64>, Vec<f64>) {
    let f = filter.len();
    let lo = &filter.lowpass_dec;
    let hi = &filter.highpass_dec;
    match padding {
        Padding::Symmetric => {
            let n = x.len();
            let nc = filter.band_len(n, padding);
            let mut approx = Vec::with_capacity(nc);
            let mut detail = Vec::with_capacity(nc);
            for o in 0..nc {
                let centre = (2 * o + 1) as isize;
                let (mut a, mut d) = (0.0, 0.0);
                for j in 0..f {
                    let v = x[reflect(centre - j as isize, n)];
                    a += lo[j] * v;
                    d += hi[j] * v;
                }
                approx.push(a);
                detail.push(d);
            }
            (approx, detail)
        }
        Padding::Periodic => {
            let ext = periodic_extension(x);
            let n = ext.len();
            let nc = n / 2;
            let mut approx = Vec::with_capacity(nc);
            let mut detail = Vec::with_capacity(nc);
            for o in 0..nc {
                let centre = (2 * o + 1) as isize;
                let (mut a, mut d) = (0.0, 0.0);
                for j in 0..f {
                    let v = ext[(centre - j as isize).rem_euclid(n as isize) as usize];
                    a += lo[j] * v;
                    d += hi[j] * v;
                }
                approx.push(a);
                detail.push(d);
            }
            (approx, detail)
        }
    }
}

/// Odd-length inputs are made even by repeating the last sample.
fn periodic_extension(x: &[f64]) -> std::borrow::Cow<'_, [f64]> {
    if x.len().is_multiple_of(2) {
        std::borrow::Cow::Borrowed(x)
    } else {
        let mut v = x.to_vec();
        v.push(*x.last().expect("non-empty"));
        std::borrow::Cow::Owned(v)
    }
}

fn synthesis_step(
    approx: &[f64],
    detail: &[f64],
    out_len: usize,
    filter: &WaveletFilter,
    padding: Padding,
) -> Vec<f64> {
    let f = filter.len() as isize;
    let lo = &filter.lowpass_rec;
    let hi = &filter.highpass_rec;
    match padding {
        Padding::Symmetric => {
            let mut out = vec![0.0; out_len];
            for (o, (&a, &d)) in approx.iter().zip(detail).enumerate() {
                let base = 2 * o as isize + 2 - f;
                for k in 0..f {
                    let t = base + k;
                    if t >= 0 && (t as usize) < out_len {
                        out[t as usize] += a * lo[k as usize] + d * hi[k as usize];
                    }
                }
            }
            out
        }
        Padding::Periodic => {
            let n = 2 * approx.len();
            let mut out = vec![0.0; n];
            for (o, (&a, &d)) in approx.iter().zip(detail).enumerate() {
                let base = 2 * o as isize + 2 - f;
                for k in 0..f {
                    let t = (base + k).rem_euclid(n as isize) as usize;
                    out[t] += a * lo[k as usize] + d * hi[k as usize];
                }
            }
            out.truncate(out_len);
            out
        }
    }
}

fn check_input(x: &[f64], levels: usize, filter: &WaveletFilter) -> Result<(), WaveletError> {
    if levels == 0 || levels > MAX_LEVELS {
        return Err(WaveletError::InvalidLevels(levels));
    }
    let required = filter.len().max(1 << levels);
    if x.len() < required {
        return Err(WaveletError::SeriesTooShort {
            len: x.len(),
            required,
        });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(WaveletError::NonFinite);
    }
    Ok(())
}

/// Mallat decomposition of `x` into `levels` detail bands and one
/// approximation band.
pub fn dwt_decompose(
    x: &[f64],
    levels: usize,
    filter: &WaveletFilter,
    padding: Padding,
) -> Result<WaveletDecomposition, WaveletError> {
    check_input(x, levels, filter)?;
    let mut details = Vec::with_capacity(levels);
    let mut current = x.to_vec();
    for _ in 0..levels {
        let (approx, detail) = analysis_step(&current, filter, padding);
        details.push(detail);
        current = approx;
    }
    Ok(WaveletDecomposition {
        approximation: current,
        details,
        levels,
        original_length: x.len(),
        padding,
    })
}

/// Inverse cascade; the output has `d.original_length` samples.
pub fn dwt_reconstruct(
    d: &WaveletDecomposition,
    filter: &WaveletFilter,
) -> Result<Vec<f64>, WaveletError> {
    let mismatch = |detail: String| WaveletError::ShapeMismatch {
        levels: d.levels,
        original_length: d.original_length,
        detail,
    };
    if d.levels == 0 || d.details.len() != d.levels {
        return Err(mismatch(format!(
            "expected {} detail bands, found {}",
            d.levels,
            d.details.len()
        )));
    }
    let lens = filter.level_lengths(d.original_length, d.levels, d.padding);
    for (k, band) in d.details.iter().enumerate() {
        if band.len() != lens[k + 1] {
            return Err(mismatch(format!(
                "detail band D{} has {} coefficients, expected {}",
                k + 1,
                band.len(),
                lens[k + 1]
            )));
        }
    }
    if d.approximation.len() != lens[d.levels] {
        return Err(mismatch(format!(
            "approximation has {} coefficients, expected {}",
            d.approximation.len(),
            lens[d.levels]
        )));
    }

    let mut current = d.approximation.clone();
    for k in (0..d.levels).rev() {
        current = synthesis_step(&current, &d.details[k], lens[k], filter, d.padding);
    }
    Ok(current)
}

/// Reconstructs `x` from its level-`levels` approximation alone, every
/// detail band set to zero.
pub fn wavelet_denoise(
    x: &[f64],
    levels: usize,
    filter: &WaveletFilter,
    padding: Padding,
) -> Result<Vec<f64>, WaveletError> {
    let d = dwt_decompose(x, levels, filter, padding)?.with_zeroed_details();
    dwt_reconstruct(&d, filter)
}
