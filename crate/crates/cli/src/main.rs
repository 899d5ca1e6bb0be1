mod args;
mod config;
mod report;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use imbalearn::ingestion::{
    label_timestamps, read_feature_matrix_csv, read_intervals_csv, read_labeled_series_csv, read_timeseries_csv,
    write_feature_matrix_csv, write_intervals_csv, write_labeled_series_csv, write_timeseries_csv,
};
use imbalearn::pipeline::{fit_event_model, fit_pipeline, predict_events, run_crossval};
use imbalearn::sampling::resample_multiclass;
use imbalearn::synthgen::{
    fig2a_noisy_scenario, fig2b_split_cluster_scenario, gaussian_blobs, synthetic_timeseries, BlobSpec, TimeSeriesSpec,
};
use imbalearn::{features, segmentation, CrossValConfig, Error, PipelineModel, RandomSource, Result};
use serde_json::json;

use args::{Cli, Command, CrossvalArgs, FeaturizeArgs, IngestArgs, PredictEventsArgs, ResampleArgs, SynthArgs, SynthKind};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let argv = match config::expand_config(std::env::args_os().collect::<Vec<OsString>>()) {
        Ok(a) => a,
        Err(e) => return fail(&e.to_string(), e.kind()),
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help / --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
            return fail(first, "usage");
        }
    };
    match run(cli.command) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e.to_string(), e.kind()),
    }
}

/// One machine-readable line on stderr.
fn fail(message: &str, kind: &str) -> ExitCode {
    eprintln!("{}", json!({ "error": message, "kind": kind }));
    ExitCode::from(if kind == "usage" { 2 } else { 1 })
}

fn run(cmd: Command) -> Result<serde_json::Value> {
    match cmd {
        Command::Ingest(a) => ingest(&a),
        Command::Synthgen(a) => synthgen(&a),
        Command::Featurize(a) => featurize(&a),
        Command::Resample(a) => resample(&a),
        Command::Crossval(a) => crossval(&a),
        Command::PredictEvents(a) => predict(&a),
    }
}

fn paths(p: &[PathBuf]) -> Vec<String> {
    p.iter().map(|p| p.display().to_string()).collect()
}

fn ingest(a: &IngestArgs) -> Result<serde_json::Value> {
    let frame = read_timeseries_csv(&a.timeseries, &a.schema.schema())?;
    let intervals = match &a.intervals {
        Some(p) => read_intervals_csv(p)?,
        None => Vec::new(),
    };
    let series = label_timestamps(&frame, &intervals, &a.normal_label)?;
    write_labeled_series_csv(&a.out, &series)?;
    Ok(json!({ "command": "ingest", "rows": series.frame.len(), "classes": series.classes.names(), "out": a.out.display().to_string() }))
}

fn synthgen(a: &SynthArgs) -> Result<serde_json::Value> {
    let fm = match a.kind {
        SynthKind::Blobs => {
            if a.dims == 0 {
                return Err(Error::Config("--dims must be >= 1".into()));
            }
            let mut centre = vec![0.0; a.dims];
            centre[0] = a.separation;
            gaussian_blobs(
                &[
                    BlobSpec::isotropic(vec![0.0; a.dims], 1.0, a.majority, imbalearn::ingestion::DEFAULT_NORMAL_LABEL),
                    BlobSpec::isotropic(centre, 1.0, a.minority, "fault"),
                ],
                a.seed,
            )?
        }
        SynthKind::Noisy => fig2a_noisy_scenario(a.seed).data,
        SynthKind::Split => fig2b_split_cluster_scenario(a.seed).data,
        SynthKind::Timeseries => return synth_timeseries(a),
    };
    write_feature_matrix_csv(&a.out, &fm, None)?;
    Ok(json!({ "command": "synthgen", "rows": fm.n_rows(), "out": a.out.display().to_string() }))
}

fn synth_timeseries(a: &SynthArgs) -> Result<serde_json::Value> {
    let spec = TimeSeriesSpec {
        noise: a.noise,
        ..TimeSeriesSpec::new(a.ticks, a.n_channels, a.shift, a.faults.clone())
    };
    let (frame, intervals) = synthetic_timeseries(&spec, a.seed)?;
    let iv_path = a.intervals_out.clone().unwrap_or_else(|| a.out.with_extension("intervals.csv"));
    write_timeseries_csv(&a.out, &frame)?;
    write_intervals_csv(&iv_path, &intervals)?;
    Ok(json!({
        "command": "synthgen",
        "rows": frame.len(),
        "out": a.out.display().to_string(),
        "intervals": iv_path.display().to_string(),
    }))
}

fn featurize(a: &FeaturizeArgs) -> Result<serde_json::Value> {
    let series = read_labeled_series_csv(&a.input, &a.normal_label)?;
    let cfg = a.window.features()?;
    let windows = segmentation::segment(&series, a.window.window_len, a.window.slide_len, a.window.label_rule)?;
    let fm = features::featurize(&windows, &cfg, series.frame.channel_names(), &series.classes)?;
    write_feature_matrix_csv(&a.out, &fm, None)?;
    Ok(json!({ "command": "featurize", "windows": fm.n_rows(), "features": fm.n_cols(), "out": a.out.display().to_string() }))
}

fn resample(a: &ResampleArgs) -> Result<serde_json::Value> {
    let fm = read_feature_matrix_csv(&a.input)?;
    let params = a.sampler.params(a.seed);
    params.validate()?;
    let out = resample_multiclass(&fm, a.sampler.sampler, &params, &RandomSource::new(a.seed))?;
    write_feature_matrix_csv(&a.out, &out.matrix, Some(&out.synthetic))?;
    Ok(json!({
        "command": "resample",
        "sampler": a.sampler.sampler.to_string(),
        "rows": out.matrix.n_rows(),
        "synthetic": out.n_synthetic(),
        "out": a.out.display().to_string(),
    }))
}

fn crossval(a: &CrossvalArgs) -> Result<serde_json::Value> {
    let fm = read_feature_matrix_csv(&a.input)?;
    let cfg = CrossValConfig {
        folds: a.folds,
        seed: a.pipeline.seed,
        pipeline: a.pipeline.pipeline()?,
    };
    let report = run_crossval(&fm, &cfg)?;
    let method = cfg.pipeline.sampler.to_string();
    let mut files = report::write_crossval(&a.out_dir, &method, &report)?;
    if let Some(path) = &a.model_out {
        let fitted = fit_pipeline(&fm, &cfg.pipeline, &RandomSource::new(cfg.seed))?;
        fitted.to_model(&fm, &a.normal_label).save(path)?;
        files.push(path.clone());
    }
    Ok(json!({
        "command": "crossval",
        "method": method,
        "folds": a.folds,
        "macro_fam": report.mean_macro.fam,
        "files": paths(&files),
    }))
}

fn predict(a: &PredictEventsArgs) -> Result<serde_json::Value> {
    let cfg = a.event_config()?;
    let test = read_timeseries_csv(&a.test, &a.schema.schema())?;
    let truth = match &a.truth {
        Some(p) => read_intervals_csv(p)?,
        None => Vec::new(),
    };
    let model = match (&a.model_in, &a.train) {
        (Some(p), _) => PipelineModel::load(p)?,
        (None, Some(train)) => {
            let series = read_labeled_series_csv(train, &a.normal_label)?;
            fit_event_model(&series, &cfg)?
        }
        (None, None) => return Err(Error::Config("predict-events needs --train or --model-in".into())),
    };
    let mut files = Vec::new();
    if let Some(p) = &a.model_out {
        model.save(p)?;
        files.push(p.clone());
    }
    let report = predict_events(&model, &test, &truth, &cfg)?;
    files.extend(report::write_events(&a.out_dir, &report, test.timestamps())?);
    Ok(json!({
        "command": "predict-events",
        "events": report.events.len(),
        "fn_ticks": report.confusion.fn_ticks,
        "fp_ticks": report.confusion.fp_ticks,
        "faulty_ticks": report.faulty_ticks,
        "files": paths(&files),
    }))
}
