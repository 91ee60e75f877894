//! One function per subcommand. Each writes its primary output to `out`.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use hfcast_core::lagstats::{acf, pacf};
use hfcast_core::lstm::{read_checkpoint, write_checkpoint};
use hfcast_core::pipeline::bars::format_timestamp;
use hfcast_core::pipeline::fixtures::{generate, FixtureKind};
use hfcast_core::pipeline::report::plot_file_name;
use hfcast_core::pipeline::{
    build_report, evaluate_model, ingest_csv, plot_csv, render_text, run_matrix, run_specs,
    series_hash, train_and_evaluate, write_bars_csv, BarSeries, ColumnMap, Denoiser,
    ForecastReport, Horizon, Ingested, ModelMeta, RunSpec,
};
use hfcast_core::ssa::{ssa_denoise, SsaOptions};
use hfcast_core::wavelet::{dwt_decompose, dwt_reconstruct, WaveletFilter};
use serde_json::{json, Value};

use crate::args::{
    AnalyzeArgs, DenoiseArgs, EvaluateArgs, FixturesArgs, IngestArgs, InputArgs, Method,
    ReportArgs, ReportFormat, RunArgs, TrainArgs,
};
use crate::config::Context;
use crate::error::CliError;
use crate::output::{write_atomic, write_json};

fn print_json(out: &mut dyn Write, value: &Value) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(CliError::compute)?;
    writeln!(out, "{text}").map_err(CliError::compute)
}

fn ingest(path: &Path, cols: &ColumnMap) -> Result<Ingested, CliError> {
    ingest_csv(path, cols).map_err(|e| CliError::Ingest(format!("{}: {e}", path.display())))
}

fn load_bars(ctx: &mut Context, input: &InputArgs) -> Result<BarSeries, CliError> {
    let cols = ctx.columns(input);
    let ing = ingest(&input.input, &cols)?;
    if !ing.diagnostics.is_empty() {
        ctx.notices.push(format!(
            "dropped {} invalid row(s) from {} (first at line {}: {})",
            ing.diagnostics.len(),
            input.input.display(),
            ing.diagnostics[0].line,
            ing.diagnostics[0].reason
        ));
    }
    Ok(ing.bars)
}

fn variance(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

pub fn cmd_ingest(ctx: &mut Context, a: &IngestArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let cols = ctx.columns(&a.input);
    let ing = ingest(&a.input.input, &cols)?;
    let bars = &ing.bars;
    if let Some(path) = &a.out {
        let mut buf = Vec::new();
        write_bars_csv(bars, &mut buf).map_err(CliError::compute)?;
        write_atomic(path, &buf)?;
    }
    print_json(
        out,
        &json!({
            "input": path_str(&a.input.input),
            "bars": bars.len(),
            "bar_interval_secs": bars.bar_interval_secs,
            "first": format_timestamp(bars.timestamps[0]),
            "last": format_timestamp(*bars.timestamps.last().expect("at least two bars")),
            "close_hash": series_hash(&bars.close),
            "dropped_rows": ing.diagnostics,
            "written": a.out.as_deref().map(path_str),
        }),
    )
}

pub fn cmd_analyze(
    ctx: &mut Context,
    a: &AnalyzeArgs,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let bars = load_bars(ctx, &a.input)?;
    let max_lag = ctx.max_lag(a.max_lag);
    let n = bars.len();
    let mut doc = json!({
        "input": path_str(&a.input.input),
        "series": "close",
        "n": n,
        "max_lag": max_lag,
    });
    if a.pacf || !a.acf {
        let r = pacf(&bars.close, max_lag).map_err(CliError::compute)?;
        let table: Vec<Value> = (1..=max_lag)
            .map(|k| json!({"lag": k, "value": r.values[k], "significant": r.is_significant(k)}))
            .collect();
        doc["confidence_bound"] = json!(r.confidence_bound);
        doc["selected_lag"] = json!(r.selected_lag);
        doc["pacf"] = Value::Array(table);
    }
    if a.acf {
        let r = acf(&bars.close, max_lag).map_err(CliError::compute)?;
        let table: Vec<Value> = (1..=max_lag)
            .map(|k| json!({"lag": k, "value": r[k]}))
            .collect();
        doc["acf"] = Value::Array(table);
    }
    print_json(out, &doc)
}

pub fn cmd_denoise(
    ctx: &mut Context,
    a: &DenoiseArgs,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let bars = load_bars(ctx, &a.input)?;
    let cfg = ctx.denoiser(&a.denoiser)?;
    let close = &bars.close;
    let (smoothed, mut sidecar) = match a.method {
        Method::Wavelet => {
            let filter = WaveletFilter::sym4();
            let d = dwt_decompose(close, cfg.wavelet_levels, &filter, cfg.wavelet_padding)
                .map_err(CliError::compute)?;
            let energies: Vec<Value> = d
                .band_energies()
                .into_iter()
                .map(|(band, energy)| json!({"band": band, "energy": energy}))
                .collect();
            let smoothed =
                dwt_reconstruct(&d.with_zeroed_details(), &filter).map_err(CliError::compute)?;
            let sidecar = json!({
                "method": "wavelet",
                "filter": "sym4",
                "levels": cfg.wavelet_levels,
                "padding": cfg.wavelet_padding,
                "band_energies": energies,
            });
            (smoothed, sidecar)
        }
        Method::Ssa => {
            let options = SsaOptions {
                center: cfg.ssa_center,
                covariance: cfg.ssa_covariance,
            };
            let (smoothed, d, selected) =
                ssa_denoise(close, cfg.ssa_embedding, cfg.ssa_threshold, options)
                    .map_err(CliError::compute)?;
            let sidecar = json!({
                "method": "ssa",
                "embedding_dim": d.embedding_dim,
                "threshold": cfg.ssa_threshold,
                "center": cfg.ssa_center,
                "covariance": cfg.ssa_covariance,
                "eigenvalues": d.eigenvalues,
                "eigenvalue_shares": d.eigenvalue_shares,
                "share_sum": d.eigenvalue_shares.iter().sum::<f64>(),
                "selected": selected,
            });
            (smoothed, sidecar)
        }
    };
    sidecar["n"] = json!(close.len());
    sidecar["input_variance"] = json!(variance(close));
    sidecar["output_variance"] = json!(variance(&smoothed));

    let method = match a.method {
        Method::Wavelet => "wavelet",
        Method::Ssa => "ssa",
    };
    let csv_path = a
        .out
        .clone()
        .unwrap_or_else(|| ctx.out_path(&format!("denoised_{method}.csv")));
    let json_path = csv_path.with_extension("json");
    let mut csv = String::from("timestamp,raw_close,smoothed_close\n");
    for i in 0..close.len() {
        csv.push_str(&format!(
            "{},{},{}\n",
            format_timestamp(bars.timestamps[i]),
            close[i],
            smoothed[i]
        ));
    }
    write_atomic(&csv_path, csv.as_bytes())?;
    write_json(&json_path, &sidecar)?;
    print_json(
        out,
        &json!({"method": method, "n": close.len(), "csv": path_str(&csv_path), "sidecar": path_str(&json_path)}),
    )
}

fn meta_path(checkpoint: &Path) -> PathBuf {
    checkpoint.with_extension("json")
}

pub fn cmd_train(ctx: &mut Context, a: &TrainArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let bars = load_bars(ctx, &a.input)?;
    let cfg = ctx.experiment(&a.model)?;
    let spec = RunSpec {
        variant: a.variant,
        horizon: a.horizon,
        seed: ctx.seed,
    };
    let (result, net, meta) = train_and_evaluate(&bars, &cfg, spec)?;
    let path = a
        .out
        .clone()
        .unwrap_or_else(|| ctx.out_path(&format!("model_{}_{}.ckpt", a.variant.slug(), a.horizon)));
    let mut buf = Vec::new();
    write_checkpoint(&net, &mut buf).map_err(CliError::compute)?;
    write_atomic(&path, &buf)?;
    write_json(&meta_path(&path), &meta)?;
    print_json(
        out,
        &json!({
            "checkpoint": path_str(&path),
            "meta": path_str(&meta_path(&path)),
            "variant": result.variant,
            "horizon": result.horizon,
            "seed": result.seed,
            "lag": result.lag,
            "loss_trace": result.loss_trace,
            "metrics": result.metrics,
        }),
    )
}

pub fn cmd_evaluate(
    ctx: &mut Context,
    a: &EvaluateArgs,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let bars = load_bars(ctx, &a.input)?;
    let unreadable = |p: &Path, e: &dyn std::fmt::Display| {
        CliError::Ingest(format!("cannot read {}: {e}", p.display()))
    };
    let bytes = std::fs::read(&a.model).map_err(|e| unreadable(&a.model, &e))?;
    let net = read_checkpoint(bytes.as_slice()).map_err(|e| unreadable(&a.model, &e))?;
    let meta_file = a.meta.clone().unwrap_or_else(|| meta_path(&a.model));
    let text = std::fs::read_to_string(&meta_file).map_err(|e| unreadable(&meta_file, &e))?;
    let meta: ModelMeta = serde_json::from_str(&text).map_err(|e| unreadable(&meta_file, &e))?;

    let fc = evaluate_model(&bars, &net, &meta)?;
    let same_data = series_hash(&bars.close) == meta.data_hash;
    let stem = format!("evaluation_{}_{}", meta.variant.slug(), meta.horizon);
    let json_path = ctx.out_path(&format!("{stem}.json"));
    write_json(
        &json_path,
        &json!({"variant": meta.variant, "horizon": meta.horizon, "same_data": same_data, "forecast": fc}),
    )?;
    let mut csv = String::from("timestamp,actual,predicted\n");
    for ((t, y), p) in fc.timestamps.iter().zip(&fc.actuals).zip(&fc.predictions) {
        csv.push_str(&format!("{},{y},{p}\n", format_timestamp(*t)));
    }
    write_atomic(&ctx.out_path(&format!("{stem}.csv")), csv.as_bytes())?;
    print_json(
        out,
        &json!({
            "variant": meta.variant,
            "horizon": meta.horizon,
            "same_data": same_data,
            "metrics": fc.metrics,
            "written": path_str(&json_path),
        }),
    )
}

fn parse_list<T: std::str::FromStr<Err = String> + Copy>(
    raw: &str,
    all: &[T],
) -> Result<Vec<T>, CliError> {
    if raw.trim().eq_ignore_ascii_case("all") {
        return Ok(all.to_vec());
    }
    raw.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.parse::<T>().map_err(CliError::Usage))
        .collect::<Result<Vec<_>, _>>()
        .and_then(|v| {
            if v.is_empty() {
                Err(CliError::Usage(format!("empty list `{raw}`")))
            } else {
                Ok(v)
            }
        })
}

/// Runs the matrix and writes `report.json`, `report.txt` and `plots/`.
/// Failed runs are recorded in the report rather than returned as errors.
pub fn cmd_run(
    ctx: &mut Context,
    a: &RunArgs,
    out: &mut dyn Write,
) -> Result<ForecastReport, CliError> {
    let variants = parse_list(&a.variants, &Denoiser::ALL)?;
    let horizons = parse_list(&a.horizons, &Horizon::ALL)?;
    let seeds = a.seeds.clone().unwrap_or_else(|| vec![ctx.seed]);
    if seeds.is_empty() {
        return Err(CliError::Usage("--seeds is empty".into()));
    }
    let cfg = ctx.experiment(&a.model)?;
    let bars = load_bars(ctx, &a.input)?;

    let started = Instant::now();
    let specs = run_specs(&variants, &horizons, &seeds);
    let outcomes = run_matrix(&bars, &cfg, &specs);
    let report = build_report(&bars, &cfg, outcomes, started.elapsed().as_millis() as u64);

    let text = render_text(&report);
    write_atomic(&ctx.out_path("report.json"), report.to_json().as_bytes())?;
    write_atomic(&ctx.out_path("report.txt"), text.as_bytes())?;
    for run in &report.runs {
        write_atomic(
            &ctx.out_path("plots").join(plot_file_name(run)),
            plot_csv(run).as_bytes(),
        )?;
    }
    for f in &report.failures {
        ctx.notices.push(format!(
            "run {} {} seed {} failed: {}",
            f.spec.variant, f.spec.horizon, f.spec.seed, f.error
        ));
    }
    write!(out, "{text}").map_err(CliError::compute)?;
    Ok(report)
}

pub fn cmd_report(_ctx: &mut Context, a: &ReportArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&a.report)
        .map_err(|e| CliError::Ingest(format!("cannot read {}: {e}", a.report.display())))?;
    let report: ForecastReport = serde_json::from_str(&text)
        .map_err(|e| CliError::Ingest(format!("{} is not a report: {e}", a.report.display())))?;
    match a.format {
        ReportFormat::Text => write!(out, "{}", render_text(&report)),
        ReportFormat::Json => writeln!(out, "{}", report.to_json()),
    }
    .map_err(CliError::compute)
}

pub fn cmd_fixtures(
    ctx: &mut Context,
    a: &FixturesArgs,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let kinds = if a.kind.iter().any(|k| k.eq_ignore_ascii_case("all")) {
        FixtureKind::ALL.to_vec()
    } else {
        a.kind
            .iter()
            .map(|k| k.parse::<FixtureKind>().map_err(CliError::Usage))
            .collect::<Result<Vec<_>, _>>()?
    };
    for kind in kinds {
        let n = a.bars.unwrap_or(kind.default_len());
        if n < 2 {
            return Err(CliError::Usage("--bars must be at least 2".into()));
        }
        let seed = if ctx.seed_given {
            ctx.seed
        } else {
            kind.default_seed()
        };
        let bars = generate(kind, n, seed);
        let path = ctx.out_path(&format!("{kind}.csv"));
        let mut buf = Vec::new();
        write_bars_csv(&bars, &mut buf).map_err(CliError::compute)?;
        write_atomic(&path, &buf)?;
        writeln!(out, "{}\t{n} bars\tseed {seed}", path.display()).map_err(CliError::compute)?;
    }
    Ok(())
}
