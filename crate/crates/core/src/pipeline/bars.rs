//! OHLCV bar series and CSV ingestion.

use std::io::{Read, Write};
use std::path::Path;

use chrono::{DateTime, NaiveDateTime};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_BAR_INTERVAL_SECS: i64 = 300;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read input: {0}")]
    Io(#[from] std::io::Error),
    #[error("input has no data rows")]
    EmptyFile,
    #[error("required column `{0}` not found in header")]
    MissingColumn(String),
    #[error("line {line}: {reason}")]
    UnparseableRow { line: u64, reason: String },
    #[error("line {line}: timestamp is not after the previous bar's")]
    NonMonotoneTimestamps { line: u64 },
    #[error("only {count} valid bars remain; at least 2 are required")]
    TooFewBars { count: usize },
}

/// Header names of the six required columns, matched case-insensitively.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ColumnMap {
    pub timestamp: String,
    pub open: String,
    pub high: String,
    pub low: String,
    pub close: String,
    pub volume: String,
}

impl Default for ColumnMap {
    fn default() -> Self {
        Self {
            timestamp: "timestamp".into(),
            open: "open".into(),
            high: "high".into(),
            low: "low".into(),
            close: "close".into(),
            volume: "volume".into(),
        }
    }
}

/// Equal-length OHLCV columns with strictly increasing epoch-second
/// timestamps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BarSeries {
    pub timestamps: Vec<i64>,
    pub open: Vec<f64>,
    pub high: Vec<f64>,
    pub low: Vec<f64>,
    pub close: Vec<f64>,
    pub volume: Vec<f64>,
    pub bar_interval_secs: i64,
}

impl BarSeries {
    pub fn len(&self) -> usize {
        self.close.len()
    }

    pub fn is_empty(&self) -> bool {
        self.close.is_empty()
    }

    /// Smallest spacing between consecutive timestamps; gaps only widen it.
    pub fn infer_interval(timestamps: &[i64]) -> i64 {
        timestamps
            .windows(2)
            .map(|w| w[1] - w[0])
            .min()
            .unwrap_or(DEFAULT_BAR_INTERVAL_SECS)
    }

    /// `None` when every bar satisfies `low <= open, close <= high`.
    pub fn ohlc_violation(open: f64, high: f64, low: f64, close: f64) -> Option<String> {
        if low > high {
            Some(format!("low {low} exceeds high {high}"))
        } else if open < low || open > high {
            Some(format!("open {open} outside [{low}, {high}]"))
        } else if close < low || close > high {
            Some(format!("close {close} outside [{low}, {high}]"))
        } else {
            None
        }
    }
}

/// A row that was parsed but rejected.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowDiagnostic {
    /// 1-based line number in the file (the header is line 1).
    pub line: u64,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ingested {
    pub bars: BarSeries,
    pub diagnostics: Vec<RowDiagnostic>,
}

/// Parses epoch seconds, RFC 3339, or a naive `YYYY-MM-DD[ T]HH:MM[:SS]`
/// (read as UTC).
pub fn parse_timestamp(raw: &str) -> Option<i64> {
    let s = raw.trim();
    if let Ok(v) = s.parse::<i64>() {
        return Some(v);
    }
    if let Ok(v) = s.parse::<f64>() {
        if v.is_finite() && v.fract() == 0.0 && v.abs() < 1e15 {
            return Some(v as i64);
        }
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Some(dt.timestamp());
    }
    const NAIVE: [&str; 4] = [
        "%Y-%m-%d %H:%M:%S",
        "%Y-%m-%dT%H:%M:%S",
        "%Y-%m-%d %H:%M",
        "%Y-%m-%dT%H:%M",
    ];
    NAIVE
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
        .map(|dt| dt.and_utc().timestamp())
}

pub fn format_timestamp(ts: i64) -> String {
    DateTime::from_timestamp(ts, 0)
        .map(|dt| dt.format("%Y-%m-%dT%H:%M:%SZ").to_string())
        .unwrap_or_else(|| ts.to_string())
}

fn locate(headers: &csv::StringRecord, name: &str) -> Result<usize, IngestError> {
    let wanted = name.trim().to_ascii_lowercase();
    headers
        .iter()
        .position(|h| h.trim().trim_start_matches('\u{feff}').to_ascii_lowercase() == wanted)
        .ok_or_else(|| IngestError::MissingColumn(name.to_string()))
}

pub fn ingest_reader<R: Read>(reader: R, columns: &ColumnMap) -> Result<Ingested, IngestError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = match rdr.headers() {
        Ok(h) if !h.is_empty() && !(h.len() == 1 && h[0].is_empty()) => h.clone(),
        Ok(_) => return Err(IngestError::EmptyFile),
        Err(e) => return Err(csv_error(e, 1)),
    };
    let idx = [
        locate(&headers, &columns.timestamp)?,
        locate(&headers, &columns.open)?,
        locate(&headers, &columns.high)?,
        locate(&headers, &columns.low)?,
        locate(&headers, &columns.close)?,
        locate(&headers, &columns.volume)?,
    ];
    let names = ["open", "high", "low", "close", "volume"];

    let mut bars = BarSeries {
        timestamps: Vec::new(),
        open: Vec::new(),
        high: Vec::new(),
        low: Vec::new(),
        close: Vec::new(),
        volume: Vec::new(),
        bar_interval_secs: DEFAULT_BAR_INTERVAL_SECS,
    };
    let mut diagnostics = Vec::new();
    let mut previous: Option<i64> = None;
    let mut rows = 0usize;

    for (k, record) in rdr.records().enumerate() {
        let fallback_line = k as u64 + 2;
        let record = record.map_err(|e| csv_error(e, fallback_line))?;
        let line = record.position().map_or(fallback_line, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        rows += 1;
        let field = |i: usize| record.get(i).unwrap_or("");
        let ts = parse_timestamp(field(idx[0])).ok_or_else(|| IngestError::UnparseableRow {
            line,
            reason: format!("cannot parse timestamp `{}`", field(idx[0])),
        })?;
        let mut values = [0.0f64; 5];
        for (j, v) in values.iter_mut().enumerate() {
            let raw = field(idx[j + 1]);
            *v = raw
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| IngestError::UnparseableRow {
                    line,
                    reason: format!("{} value `{raw}` is not a finite number", names[j]),
                })?;
        }
        if previous.is_some_and(|p| ts <= p) {
            return Err(IngestError::NonMonotoneTimestamps { line });
        }
        previous = Some(ts);

        let [open, high, low, close, volume] = values;
        let violation = BarSeries::ohlc_violation(open, high, low, close)
            .or_else(|| (volume < 0.0).then(|| format!("negative volume {volume}")));
        if let Some(reason) = violation {
            diagnostics.push(RowDiagnostic { line, reason });
            continue;
        }
        bars.timestamps.push(ts);
        bars.open.push(open);
        bars.high.push(high);
        bars.low.push(low);
        bars.close.push(close);
        bars.volume.push(volume);
    }

    if rows == 0 {
        return Err(IngestError::EmptyFile);
    }
    if bars.len() < 2 {
        return Err(IngestError::TooFewBars { count: bars.len() });
    }
    bars.bar_interval_secs = BarSeries::infer_interval(&bars.timestamps);
    Ok(Ingested { bars, diagnostics })
}

fn csv_error(e: csv::Error, fallback_line: u64) -> IngestError {
    let line = e.position().map_or(fallback_line, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => IngestError::Io(io),
        other => IngestError::UnparseableRow {
            line,
            reason: format!("{other:?}"),
        },
    }
}

pub fn ingest_csv(path: &Path, columns: &ColumnMap) -> Result<Ingested, IngestError> {
    ingest_reader(std::fs::File::open(path)?, columns)
}

/// Writes `timestamp,open,high,low,close,volume` with ISO-8601 UTC
/// timestamps and shortest round-trip floats.
pub fn write_bars_csv<W: Write>(bars: &BarSeries, writer: W) -> Result<(), std::io::Error> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["timestamp", "open", "high", "low", "close", "volume"])?;
    for i in 0..bars.len() {
        w.write_record([
            format_timestamp(bars.timestamps[i]),
            bars.open[i].to_string(),
            bars.high[i].to_string(),
            bars.low[i].to_string(),
            bars.close[i].to_string(),
            bars.volume[i].to_string(),
        ])?;
    }
    w.flush()
}
