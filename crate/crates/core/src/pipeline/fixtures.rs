//! Seeded synthetic bar series.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal};
use serde::{Deserialize, Serialize};

use super::bars::{BarSeries, DEFAULT_BAR_INTERVAL_SECS};

/// 2024-01-02T14:30:00Z.
pub const FIXTURE_START: i64 = 1_704_205_800;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FixtureKind {
    /// Drift, an intraday and a weekly-ish cycle, Gaussian noise.
    Standard,
    /// `x_t = 0.7 x_{t-1} + e_t` around 100.
    Ar1,
    /// `x_t = 0.5 x_{t-1} + 0.3 x_{t-2} + e_t` around 100.
    Ar2,
    /// One sine of period 50 plus noise.
    SineNoise,
    /// Every price equal to 100.
    Constant,
}

impl FixtureKind {
    pub const ALL: [FixtureKind; 5] = [
        FixtureKind::Standard,
        FixtureKind::Ar1,
        FixtureKind::Ar2,
        FixtureKind::SineNoise,
        FixtureKind::Constant,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FixtureKind::Standard => "standard",
            FixtureKind::Ar1 => "ar1",
            FixtureKind::Ar2 => "ar2",
            FixtureKind::SineNoise => "sine-noise",
            FixtureKind::Constant => "constant",
        }
    }

    pub fn default_seed(self) -> u64 {
        match self {
            FixtureKind::Standard => 20_200_101,
            FixtureKind::Ar1 => 7,
            FixtureKind::Ar2 => 11,
            FixtureKind::SineNoise => 3,
            FixtureKind::Constant => 0,
        }
    }

    pub fn default_len(self) -> usize {
        match self {
            FixtureKind::Standard => 5000,
            _ => 2000,
        }
    }
}

impl fmt::Display for FixtureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FixtureKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FixtureKind::ALL
            .into_iter()
            .find(|k| k.name() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| {
                format!("unknown fixture `{s}` (expected standard|ar1|ar2|sine-noise|constant)")
            })
    }
}

fn close_path(kind: FixtureKind, n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let noise = |sd: f64| Normal::new(0.0, sd).expect("positive sd");
    match kind {
        FixtureKind::Standard => {
            let e = noise(0.5);
            (0..n)
                .map(|t| {
                    let t = t as f64;
                    100.0
                        + 0.002 * t
                        + (2.0 * PI * t / 78.0).sin()
                        + 2.0 * (2.0 * PI * t / 390.0).sin()
                        + e.sample(rng)
                })
                .collect()
        }
        FixtureKind::Ar1 | FixtureKind::Ar2 => {
            let (a1, a2) = if kind == FixtureKind::Ar1 {
                (0.7, 0.0)
            } else {
                (0.5, 0.3)
            };
            let e = noise(1.0);
            let (mut x1, mut x2) = (0.0, 0.0);
            // burn-in so the path starts near stationarity
            for _ in 0..200 {
                let x = a1 * x1 + a2 * x2 + e.sample(rng);
                x2 = x1;
                x1 = x;
            }
            (0..n)
                .map(|_| {
                    let x = a1 * x1 + a2 * x2 + e.sample(rng);
                    x2 = x1;
                    x1 = x;
                    100.0 + x
                })
                .collect()
        }
        FixtureKind::SineNoise => {
            let e = noise(0.5);
            (0..n)
                .map(|t| 100.0 + 5.0 * (2.0 * PI * t as f64 / 50.0).sin() + e.sample(rng))
                .collect()
        }
        FixtureKind::Constant => vec![100.0; n],
    }
}

/// `n` bars of the given kind, 5 minutes apart. Opens repeat the previous
/// close; highs and lows widen the open/close range by half-normal noise.
pub fn generate(kind: FixtureKind, n: usize, seed: u64) -> BarSeries {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let close = close_path(kind, n, &mut rng);
    let wick: Normal<f64> = Normal::new(0.0, 0.1).expect("positive sd");
    let vol: LogNormal<f64> = LogNormal::new(8.0, 0.5).expect("positive sigma");
    let constant = kind == FixtureKind::Constant;

    let mut bars = BarSeries {
        timestamps: (0..n as i64)
            .map(|i| FIXTURE_START + i * DEFAULT_BAR_INTERVAL_SECS)
            .collect(),
        open: Vec::with_capacity(n),
        high: Vec::with_capacity(n),
        low: Vec::with_capacity(n),
        close: close.clone(),
        volume: Vec::with_capacity(n),
        bar_interval_secs: DEFAULT_BAR_INTERVAL_SECS,
    };
    for t in 0..n {
        let open = if t == 0 { close[0] } else { close[t - 1] };
        let (up, down) = if constant {
            (0.0, 0.0)
        } else {
            (wick.sample(&mut rng).abs(), wick.sample(&mut rng).abs())
        };
        bars.open.push(open);
        bars.high.push(open.max(close[t]) + up);
        bars.low.push(open.min(close[t]) - down);
        bars.volume.push(if constant {
            1000.0
        } else {
            vol.sample(&mut rng).round()
        });
    }
    bars
}

pub fn generate_default(kind: FixtureKind) -> BarSeries {
    generate(kind, kind.default_len(), kind.default_seed())
}
