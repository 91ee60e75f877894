//! Report assembly and rendering (JSON, fixed-width text, plot CSVs).

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::bars::{format_timestamp, BarSeries};
use super::compare::{compare_all, ComparisonTable, ModelScore};
use super::experiment::{series_hash, ExperimentConfig, RunFailure, RunResult};
use super::reference::{reference_tables, REFERENCE_DATA};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForecastReport {
    pub version: String,
    pub data_hash: String,
    pub n_bars: usize,
    pub bar_interval_secs: i64,
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub runs: Vec<RunResult>,
    pub failures: Vec<RunFailure>,
    /// One table per (seed, horizon) that has an LSTM baseline.
    pub comparisons: Vec<ComparisonTable>,
    /// Published 5-minute DJIA results, for orientation only.
    pub reference: Vec<ComparisonTable>,
    pub timing_ms: u64,
}

impl ForecastReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

pub fn build_report(
    bars: &BarSeries,
    cfg: &ExperimentConfig,
    outcomes: Vec<Result<RunResult, RunFailure>>,
    timing_ms: u64,
) -> ForecastReport {
    let mut runs = Vec::new();
    let mut failures = Vec::new();
    for o in outcomes {
        match o {
            Ok(r) => runs.push(r),
            Err(f) => failures.push(f),
        }
    }
    let scores: Vec<ModelScore> = runs.iter().map(ModelScore::from).collect();
    ForecastReport {
        version: env!("CARGO_PKG_VERSION").to_string(),
        data_hash: series_hash(&bars.close),
        n_bars: bars.len(),
        bar_interval_secs: bars.bar_interval_secs,
        config: cfg.clone(),
        config_hash: cfg.hash(),
        comparisons: compare_all(&scores),
        runs,
        failures,
        reference: reference_tables(),
        timing_ms,
    }
}

const HEADER: &str = "Model                    RMSE         MAE        MAPE       SDAPE";

fn opt_pct(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.2}"))
}

fn write_table(out: &mut String, table: &ComparisonTable) {
    out.push_str(HEADER);
    out.push('\n');
    for r in &table.rows {
        let _ = writeln!(
            out,
            "{:<16}{:>12.7}{:>12.7}{:>12.7}{:>12.7}",
            r.label, r.rmse, r.mae, r.mape, r.sdape
        );
    }
    out.push_str("\nImprovement over LSTM (%)\n");
    out.push_str(HEADER);
    out.push('\n');
    for r in table
        .rows
        .iter()
        .filter(|r| r.variant != super::Denoiser::None)
    {
        let i = &r.improvement;
        let _ = writeln!(
            out,
            "{:<16}{:>12}{:>12}{:>12}{:>12}",
            r.label,
            opt_pct(i.rmse),
            opt_pct(i.mae),
            opt_pct(i.mape),
            opt_pct(i.sdape)
        );
    }
}

/// Fixed-width tables: one per (seed, horizon), then the reference tables.
pub fn render_text(report: &ForecastReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "hfcast {}  bars={}  interval={}s  data={}  config={}",
        report.version,
        report.n_bars,
        report.bar_interval_secs,
        &report.data_hash[..12.min(report.data_hash.len())],
        &report.config_hash[..12.min(report.config_hash.len())]
    );

    let mut keys: Vec<_> = report.runs.iter().map(|r| (r.seed, r.horizon)).collect();
    keys.dedup();
    for (seed, horizon) in keys {
        let _ = writeln!(
            out,
            "\n== Horizon {horizon} ({} bars), seed {seed} ==",
            horizon.steps()
        );
        if let Some(t) = report
            .comparisons
            .iter()
            .find(|t| t.seed == seed && t.horizon == horizon)
        {
            write_table(&mut out, t);
        } else {
            out.push_str(HEADER);
            out.push('\n');
            for r in report
                .runs
                .iter()
                .filter(|r| r.seed == seed && r.horizon == horizon)
            {
                let m = &r.metrics;
                let _ = writeln!(
                    out,
                    "{:<16}{:>12.7}{:>12.7}{:>12.7}{:>12.7}",
                    r.label, m.rmse, m.mae, m.mape_fraction, m.sdape
                );
            }
            out.push_str("(no LSTM baseline, improvements omitted)\n");
        }
    }

    if !report.failures.is_empty() {
        out.push_str("\n== Failed runs ==\n");
        for f in &report.failures {
            let _ = writeln!(
                out,
                "{} {} seed {}: {}",
                f.spec.variant, f.spec.horizon, f.spec.seed, f.error
            );
        }
    }

    for t in &report.reference {
        let _ = writeln!(
            out,
            "\n== Reference: {REFERENCE_DATA}, horizon {} ==",
            t.horizon
        );
        write_table(&mut out, t);
    }
    out.push_str("\nMAPE and SDAPE are fractions of the actual price (report.json also gives MAPE in percent).\n");
    out
}

/// `timestamp,actual,predicted` over the test window.
pub fn plot_csv(run: &RunResult) -> String {
    let mut out = String::from("timestamp,actual,predicted\n");
    for ((t, a), p) in run
        .timestamps
        .iter()
        .zip(&run.actuals)
        .zip(&run.predictions)
    {
        let _ = writeln!(out, "{},{a},{p}", format_timestamp(*t));
    }
    out
}

pub fn plot_file_name(run: &RunResult) -> String {
    format!(
        "{}_{}_seed{}.csv",
        run.variant.slug(),
        run.horizon,
        run.seed
    )
}
