//! `cliquesel` — train/test hygiene for labeled time series: compute
//! blended similarities, pick thresholds, select training instances via
//! per-class maximum-weight cliques (or the comparison selectors), and
//! evaluate everything under a repeated stratified hold-out.

mod commands;
mod output;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Exit codes: 0 success, 2 configuration error, 3 data error,
/// 4 internal assertion failure.
#[derive(Parser)]
#[command(name = "cliquesel", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct InputArgs {
    /// Input dataset: CSV file (rows `label,v1,...,vL`) or a directory of
    /// per-class files.
    #[arg(long)]
    input: std::path::PathBuf,

    /// Input layout.
    #[arg(long, value_parser = ["csv-rows", "labeled-dir"], default_value = "csv-rows")]
    format: String,

    /// Channels per row for interleaved multi-channel records.
    #[arg(long)]
    channels: Option<usize>,

    /// Channel to keep (0-based) when `--channels` is given.
    #[arg(long, default_value_t = 0)]
    channel: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic labeled dataset (two-harmonic class shapes
    /// plus unstructured invalid trials) and write it as CSV.
    Synth {
        #[arg(long, default_value_t = 2)]
        classes: usize,
        #[arg(long, default_value_t = 20)]
        per_class: usize,
        #[arg(long, default_value_t = 64)]
        length: usize,
        /// Fraction of each class replaced by unstructured trials.
        #[arg(long, default_value_t = 0.0)]
        noise_fraction: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output CSV path.
        #[arg(long)]
        out: std::path::PathBuf,
    },

    /// Compute the blended similarity matrix and write it as CSV and JSON
    /// (`<out>.csv`, `<out>.json`).
    Similarity {
        #[command(flatten)]
        input: InputArgs,
        /// Weight of the global (Fréchet) term, in [0, 1].
        #[arg(long, default_value_t = 0.5)]
        lambda: f64,
        /// Segment lag of the local-trend differences.
        #[arg(long, default_value_t = 1)]
        q: usize,
        /// Worker threads for the pairwise computation (default: one).
        #[arg(long)]
        workers: Option<usize>,
        /// Output path stem.
        #[arg(long)]
        out: std::path::PathBuf,
    },

    /// Histogram a similarity matrix and derive a threshold schedule from
    /// cumulative-mass targets (`<out>_histogram.csv`, `<out>_deltas.json`).
    Thresholds {
        /// Similarity matrix JSON produced by `similarity`.
        #[arg(long)]
        matrix: std::path::PathBuf,
        /// Histogram bin width.
        #[arg(long, default_value_t = 0.05)]
        interval: f64,
        /// Strictly ascending mass targets in (0, 1), comma-separated.
        #[arg(long, value_delimiter = ',', required = true)]
        targets: Vec<f64>,
        /// Output path stem.
        #[arg(long)]
        out: std::path::PathBuf,
    },

    /// Run one training-set selector on a dataset and write the selection
    /// as JSON.
    Select {
        #[command(flatten)]
        input: InputArgs,
        /// Selector: mwc, lw, gw, lrt or grt.
        #[arg(long, value_parser = ["mwc", "lw", "gw", "lrt", "grt"])]
        method: String,
        #[arg(long, default_value_t = 0.5)]
        lambda: f64,
        #[arg(long, default_value_t = 1)]
        q: usize,
        /// Explicit per-class thresholds, strictly descending (mwc).
        #[arg(long, value_delimiter = ',')]
        deltas: Option<Vec<f64>>,
        /// Mass targets resolved against the similarity histogram (mwc).
        #[arg(long, value_delimiter = ',')]
        targets: Option<Vec<f64>>,
        /// Histogram bin width for `--targets`.
        #[arg(long, default_value_t = 0.05)]
        interval: f64,
        /// Append a final zero threshold so the last class keeps all of
        /// its remaining trials (mwc).
        #[arg(long, default_value_t = false)]
        final_delta_zero: bool,
        /// Selection count (lw: per class; gw: total; lrt/grt: per test
        /// trial after the `--m` shortlist).
        #[arg(long)]
        k: Option<usize>,
        /// Shortlist size for lrt/grt (defaults to `--k`).
        #[arg(long)]
        m: Option<usize>,
        /// Test dataset (CSV) for the nearest-to-test selectors.
        #[arg(long)]
        test: Option<std::path::PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
        /// Output JSON path.
        #[arg(long)]
        out: std::path::PathBuf,
    },

    /// Run the experiment sweep described by a JSON config file and write
    /// the reports (`<out>_report.json`, `<out>_summary.csv`). Flags
    /// override their config keys.
    Evaluate {
        /// Experiment configuration file; see the README for the schema.
        #[arg(long)]
        config: std::path::PathBuf,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the config worker count.
        #[arg(long)]
        workers: Option<usize>,
        /// Override the config blend weight.
        #[arg(long)]
        lambda: Option<f64>,
        /// Override the config segment lag.
        #[arg(long)]
        q: Option<usize>,
        /// Override the config neighbour count.
        #[arg(long)]
        k_nn: Option<usize>,
        /// Override the config histogram bin width.
        #[arg(long)]
        interval: Option<f64>,
        /// Output path stem.
        #[arg(long)]
        out: std::path::PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Synth {
            classes,
            per_class,
            length,
            noise_fraction,
            seed,
            out,
        } => commands::synth(classes, per_class, length, noise_fraction, seed, &out),
        Command::Similarity {
            input,
            lambda,
            q,
            workers,
            out,
        } => commands::with_workers(workers, || commands::similarity(&input, lambda, q, &out)),
        Command::Thresholds {
            matrix,
            interval,
            targets,
            out,
        } => commands::thresholds(&matrix, interval, &targets, &out),
        Command::Select {
            input,
            method,
            lambda,
            q,
            deltas,
            targets,
            interval,
            final_delta_zero,
            k,
            m,
            test,
            workers,
            out,
        } => commands::with_workers(workers, || {
            commands::select(commands::SelectArgs {
                input: &input,
                method: &method,
                lambda,
                q,
                deltas: deltas.as_deref(),
                targets: targets.as_deref(),
                interval,
                final_delta_zero,
                k,
                m,
                test: test.as_deref(),
                out: &out,
            })
        }),
        Command::Evaluate {
            config,
            seed,
            workers,
            lambda,
            q,
            k_nn,
            interval,
            out,
        } => commands::evaluate(
            &config,
            commands::EvalOverrides {
                seed,
                workers,
                lambda,
                q,
                k_nn,
                interval,
            },
            &out,
        ),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
