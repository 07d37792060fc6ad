//! Subcommand implementations.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use cliquesel_core::baselines::{grt_select, gw_select, lrt_select, lw_select};
use cliquesel_core::clique::{class_order_by_size, mwc_select, SelectionParams, SelectionResult};
use cliquesel_core::eval::{run_experiment, DeltaSpec, ExperimentConfig, Selector};
use cliquesel_core::graph::WeightedGraph;
use cliquesel_core::ingest::{
    load_trials, synth_trials, trials_to_csv, ChannelSpec, InputFormat, SynthConfig, Trial,
    TrialSet,
};
use cliquesel_core::similarity::{similarity_matrix, SimilarityMatrix, SimilarityParams};
use cliquesel_core::threshold::{delta_schedule, similarity_distribution};
use cliquesel_core::{Error, Result};

use crate::output::write_atomic;
use crate::InputArgs;

/// Runs `f` inside a dedicated rayon pool when a worker count is given;
/// only the pairwise similarity computation is parallel.
pub fn with_workers<T, F>(workers: Option<usize>, f: F) -> Result<T>
where
    T: Send,
    F: FnOnce() -> Result<T> + Send,
{
    match workers {
        None => f(),
        Some(n) => {
            if n == 0 {
                return Err(Error::Config("worker count must be >= 1".into()));
            }
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?;
            pool.install(f)
        }
    }
}

fn parse_format(s: &str) -> Result<InputFormat> {
    match s {
        "csv-rows" => Ok(InputFormat::CsvRows),
        "labeled-dir" => Ok(InputFormat::LabeledDir),
        other => Err(Error::Config(format!("unknown input format {other:?}"))),
    }
}

fn load_input(args: &InputArgs) -> Result<TrialSet<f64>> {
    let format = parse_format(&args.format)?;
    let channel = args.channels.map(|channels| ChannelSpec {
        channels,
        channel: args.channel,
    });
    load_trials(&args.input, format, channel)
}

pub fn synth(
    classes: usize,
    per_class: usize,
    length: usize,
    noise_fraction: f64,
    seed: u64,
    out: &Path,
) -> Result<()> {
    let cfg = SynthConfig {
        classes,
        per_class,
        length,
        noise_fraction,
        seed,
    };
    let set = synth_trials::<f64>(&cfg)?;
    write_atomic(out, &trials_to_csv(&set))?;
    println!(
        "wrote {} trials ({} unstructured) to {}",
        set.len(),
        set.noise_ids().len(),
        out.display()
    );
    Ok(())
}

pub fn similarity(input: &InputArgs, lambda: f64, q: usize, out: &Path) -> Result<()> {
    let set = load_input(input)?;
    let params = SimilarityParams::new(lambda, q);
    let mu = similarity_matrix(&set, &params)?;
    let csv_path = out.with_extension("csv");
    let json_path = out.with_extension("json");
    write_atomic(&csv_path, &mu.to_csv())?;
    write_atomic(&json_path, &mu.to_json())?;
    println!(
        "wrote {n} x {n} similarity matrix to {} and {}",
        csv_path.display(),
        json_path.display(),
        n = mu.n()
    );
    Ok(())
}

#[derive(Serialize)]
struct ScheduleFile<'a> {
    interval: f64,
    targets: &'a [f64],
    deltas: &'a [f64],
    warnings: &'a [String],
}

pub fn thresholds(matrix: &Path, interval: f64, targets: &[f64], out: &Path) -> Result<()> {
    let text = std::fs::read_to_string(matrix)?;
    let mu = SimilarityMatrix::<f64>::from_json(&text)?;
    let hist = similarity_distribution(&mu, interval)?;
    let schedule = delta_schedule(&hist, targets)?;
    for w in &schedule.warnings {
        eprintln!("warning: {w}");
    }
    let hist_path = stem_with(out, "_histogram.csv");
    let deltas_path = stem_with(out, "_deltas.json");
    write_atomic(&hist_path, &hist.to_csv())?;
    let schedule_json = serde_json::to_string_pretty(&ScheduleFile {
        interval,
        targets,
        deltas: &schedule.deltas,
        warnings: &schedule.warnings,
    })
    .expect("schedule serializes");
    write_atomic(&deltas_path, &schedule_json)?;
    println!(
        "wrote {} and {}",
        hist_path.display(),
        deltas_path.display()
    );
    Ok(())
}

fn stem_with(out: &Path, suffix: &str) -> PathBuf {
    let mut s = out.as_os_str().to_os_string();
    s.push(suffix);
    PathBuf::from(s)
}

pub struct SelectArgs<'a> {
    pub input: &'a InputArgs,
    pub method: &'a str,
    pub lambda: f64,
    pub q: usize,
    pub deltas: Option<&'a [f64]>,
    pub targets: Option<&'a [f64]>,
    pub interval: f64,
    pub final_delta_zero: bool,
    pub k: Option<usize>,
    pub m: Option<usize>,
    pub test: Option<&'a Path>,
    pub out: &'a Path,
}

/// Re-ids test trials past the training id range so a combined matrix can
/// cover both sets.
fn offset_ids(set: &TrialSet<f64>, offset: u64) -> Result<TrialSet<f64>> {
    let trials = set
        .trials()
        .iter()
        .map(|t| Trial::new(t.id + offset, t.label, t.samples.clone()))
        .collect::<Result<Vec<_>>>()?;
    TrialSet::new(trials)
}

pub fn select(args: SelectArgs<'_>) -> Result<()> {
    let train = load_input(args.input)?;
    let params = SimilarityParams::new(args.lambda, args.q);

    let result = match args.method {
        "mwc" => {
            let mu = similarity_matrix(&train, &params)?;
            let mut deltas = match (args.deltas, args.targets) {
                (Some(d), None) => d.to_vec(),
                (None, Some(t)) => {
                    let hist = similarity_distribution(&mu, args.interval)?;
                    let schedule = delta_schedule(&hist, t)?;
                    for w in &schedule.warnings {
                        eprintln!("warning: {w}");
                    }
                    schedule.deltas
                }
                (Some(_), Some(_)) => {
                    return Err(Error::Config(
                        "give either --deltas or --targets, not both".into(),
                    ))
                }
                (None, None) => {
                    return Err(Error::Config(
                        "the mwc selector needs --deltas or --targets".into(),
                    ))
                }
            };
            if args.final_delta_zero {
                if let Some(&last) = deltas.last() {
                    if last <= 0.0 {
                        return Err(Error::Config(
                            "--final-delta-zero needs a positive final threshold to step below"
                                .into(),
                        ));
                    }
                }
                deltas.push(0.0);
            }
            let graph = WeightedGraph::build(&train, mu)?;
            let class_order = class_order_by_size(&graph);
            let (deltas, warnings) =
                cliquesel_core::eval::resolve_deltas(&deltas, class_order.len(), args.interval)?;
            for w in &warnings {
                eprintln!("warning: {w}");
            }
            let mut result = mwc_select(&graph, &deltas, &class_order)?;
            result.params.lambda = Some(args.lambda);
            result.params.q = Some(args.q);
            result
        }
        method @ ("lw" | "gw") => {
            let k = args
                .k
                .ok_or_else(|| Error::Config(format!("{method} needs --k")))?;
            let mu = similarity_matrix(&train, &params)?;
            let selected = if method == "lw" {
                lw_select(&train, &mu, k)?
            } else {
                gw_select(&train, &mu, k)?
            };
            SelectionResult::flat(
                method,
                SelectionParams {
                    lambda: Some(args.lambda),
                    q: Some(args.q),
                    k: Some(k),
                    ..SelectionParams::default()
                },
                selected,
                &train.ids(),
            )
        }
        method @ ("lrt" | "grt") => {
            let k = args
                .k
                .ok_or_else(|| Error::Config(format!("{method} needs --k")))?;
            let m = args.m.unwrap_or(k);
            let test_path = args
                .test
                .ok_or_else(|| Error::Config(format!("{method} needs --test")))?;
            let test_raw = load_trials::<f64>(
                test_path,
                parse_format(&args.input.format)?,
                args.input
                    .channels
                    .map(|channels| ChannelSpec {
                        channels,
                        channel: args.input.channel,
                    }),
            )?;
            let test = offset_ids(&test_raw, train.len() as u64)?;
            let mut combined_trials = train.trials().to_vec();
            combined_trials.extend(test.trials().iter().cloned());
            let combined = TrialSet::new(combined_trials)?;
            let mu = similarity_matrix(&combined, &params)?;
            let selected = if method == "lrt" {
                lrt_select(&train, &test, &mu, m, k)?
            } else {
                grt_select(&train, &test, &mu, m, k)?
            };
            SelectionResult::flat(
                method,
                SelectionParams {
                    lambda: Some(args.lambda),
                    q: Some(args.q),
                    k: Some(k),
                    m: Some(m),
                    ..SelectionParams::default()
                },
                selected,
                &train.ids(),
            )
        }
        other => return Err(Error::Config(format!("unknown selector {other:?}"))),
    };

    write_atomic(args.out, &result.to_json())?;
    println!(
        "selected {} of {} trials with {}; wrote {}",
        result.selected.len(),
        train.len(),
        result.method,
        args.out.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum DatasetSpec {
    Synth(SynthConfig),
    File {
        path: PathBuf,
        #[serde(default = "default_format")]
        format: String,
        #[serde(default)]
        channels: Option<usize>,
        #[serde(default)]
        channel: usize,
    },
}

fn default_format() -> String {
    "csv-rows".into()
}

/// Sweep points for the per-class thresholds: each inner list is one
/// sweep point (either explicit thresholds or mass targets).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum DeltaPoints {
    Explicit(Vec<Vec<f64>>),
    MassTargets(Vec<Vec<f64>>),
}

/// On-disk experiment configuration. Every field mirrors a CLI flag where
/// one exists; flags win.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalFileConfig {
    dataset: DatasetSpec,
    #[serde(default = "default_lambda")]
    lambda: f64,
    #[serde(default = "default_q")]
    q: usize,
    #[serde(default = "default_interval")]
    interval: f64,
    #[serde(default = "default_beta")]
    beta: f64,
    #[serde(default = "default_k_nn")]
    k_nn: usize,
    #[serde(default = "default_ratio")]
    ratio: (u32, u32),
    #[serde(default = "default_repetitions")]
    repetitions: usize,
    #[serde(default)]
    seed: u64,
    selectors: Vec<String>,
    deltas: DeltaPoints,
    #[serde(default)]
    workers: Option<usize>,
}

fn default_lambda() -> f64 {
    0.5
}
fn default_q() -> usize {
    1
}
fn default_interval() -> f64 {
    0.05
}
fn default_beta() -> f64 {
    1.0
}
fn default_k_nn() -> usize {
    1
}
fn default_ratio() -> (u32, u32) {
    (2, 1)
}
fn default_repetitions() -> usize {
    3
}

/// Flag-level overrides for [`evaluate`]; flags win over config keys.
#[derive(Debug, Default, Clone, Copy)]
pub struct EvalOverrides {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub lambda: Option<f64>,
    pub q: Option<usize>,
    pub k_nn: Option<usize>,
    pub interval: Option<f64>,
}

pub fn evaluate(config_path: &Path, overrides: EvalOverrides, out: &Path) -> Result<()> {
    let text = std::fs::read_to_string(config_path)?;
    let mut cfg: EvalFileConfig = serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("config file {}: {e}", config_path.display())))?;
    if let Some(seed) = overrides.seed {
        cfg.seed = seed;
    }
    if let Some(lambda) = overrides.lambda {
        cfg.lambda = lambda;
    }
    if let Some(q) = overrides.q {
        cfg.q = q;
    }
    if let Some(k_nn) = overrides.k_nn {
        cfg.k_nn = k_nn;
    }
    if let Some(interval) = overrides.interval {
        cfg.interval = interval;
    }
    let workers = overrides.workers.or(cfg.workers);

    let set: TrialSet<f64> = match &cfg.dataset {
        DatasetSpec::Synth(synth_cfg) => synth_trials(synth_cfg)?,
        DatasetSpec::File {
            path,
            format,
            channels,
            channel,
        } => load_trials(
            path,
            parse_format(format)?,
            channels.map(|c| ChannelSpec {
                channels: c,
                channel: *channel,
            }),
        )?,
    };

    let selectors: Vec<Selector> = cfg
        .selectors
        .iter()
        .map(|s| s.parse())
        .collect::<Result<_>>()?;
    if selectors.is_empty() {
        return Err(Error::Config("no selectors listed".into()));
    }
    let points: Vec<DeltaSpec<f64>> = match &cfg.deltas {
        DeltaPoints::Explicit(points) => points
            .iter()
            .map(|p| DeltaSpec::Explicit(p.clone()))
            .collect(),
        DeltaPoints::MassTargets(points) => points
            .iter()
            .map(|p| DeltaSpec::MassTargets(p.clone()))
            .collect(),
    };
    if points.is_empty() {
        return Err(Error::Config("no threshold sweep points listed".into()));
    }

    let reports = with_workers(workers, || -> Result<Vec<_>> {
        let mut reports = Vec::new();
        for point in &points {
            for &selector in &selectors {
                let experiment = ExperimentConfig {
                    selector,
                    lambda: cfg.lambda,
                    q: cfg.q,
                    interval: cfg.interval,
                    delta: point.clone(),
                    beta: cfg.beta,
                    k_nn: cfg.k_nn,
                    ratio: cfg.ratio,
                    repetitions: cfg.repetitions,
                    seed: cfg.seed,
                };
                reports.push(run_experiment(&set, &experiment)?);
            }
        }
        Ok(reports)
    })?;

    let report_path = stem_with(out, "_report.json");
    let summary_path = stem_with(out, "_summary.csv");
    let json = serde_json::to_string_pretty(&reports).expect("reports serialize");
    write_atomic(&report_path, &json)?;

    let mut summary =
        String::from("selector,deltas,mean_rand_index,mean_f_score,mean_kappa,mean_selected\n");
    for r in &reports {
        let deltas = r
            .deltas
            .iter()
            .map(|d| format!("{d}"))
            .collect::<Vec<_>>()
            .join(";");
        summary.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.config.selector, deltas, r.mean.rand_index, r.mean.f_score, r.mean.kappa,
            r.mean.selected
        ));
    }
    write_atomic(&summary_path, &summary)?;
    println!(
        "wrote {} report(s) to {} and {}",
        reports.len(),
        report_path.display(),
        summary_path.display()
    );
    Ok(())
}
