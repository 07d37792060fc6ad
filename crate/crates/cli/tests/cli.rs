//! End-to-end runs of the binary: happy paths, exit codes and output
//! determinism.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cliquesel"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn read(path: &Path) -> Vec<u8> {
    fs::read(path).unwrap_or_else(|e| panic!("read {}: {e}", path.display()))
}

#[test]
fn synth_similarity_thresholds_select_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.csv");
    let status = run(&[
        "synth",
        "--classes",
        "2",
        "--per-class",
        "6",
        "--length",
        "32",
        "--noise-fraction",
        "0.2",
        "--seed",
        "7",
        "--out",
        data.to_str().unwrap(),
    ]);
    assert!(status.status.success(), "{status:?}");
    let rows = fs::read_to_string(&data).unwrap();
    assert_eq!(rows.lines().count(), 12);

    let matrix_stem = dir.path().join("matrix");
    let status = run(&[
        "similarity",
        "--input",
        data.to_str().unwrap(),
        "--lambda",
        "0.5",
        "--q",
        "1",
        "--out",
        matrix_stem.to_str().unwrap(),
    ]);
    assert!(status.status.success(), "{status:?}");
    let matrix_csv = fs::read_to_string(dir.path().join("matrix.csv")).unwrap();
    assert_eq!(matrix_csv.lines().count(), 12);
    assert_eq!(matrix_csv.lines().next().unwrap().split(',').count(), 12);

    let thr_stem = dir.path().join("thr");
    let status = run(&[
        "thresholds",
        "--matrix",
        dir.path().join("matrix.json").to_str().unwrap(),
        "--interval",
        "0.05",
        "--targets",
        "0.3,0.6",
        "--out",
        thr_stem.to_str().unwrap(),
    ]);
    assert!(status.status.success(), "{status:?}");
    let hist = fs::read_to_string(dir.path().join("thr_histogram.csv")).unwrap();
    assert!(hist.starts_with("bin_lower,bin_upper,count,density\n"));
    let densities: f64 = hist
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(3).unwrap().parse::<f64>().unwrap())
        .sum();
    assert!((densities - 1.0).abs() < 1e-9);
    let deltas: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("thr_deltas.json")).unwrap())
            .unwrap();
    let d = deltas["deltas"].as_array().unwrap();
    assert_eq!(d.len(), 2);
    assert!(d[0].as_f64().unwrap() > d[1].as_f64().unwrap());

    let sel_path = dir.path().join("selection.json");
    let status = run(&[
        "select",
        "--input",
        data.to_str().unwrap(),
        "--method",
        "mwc",
        "--targets",
        "0.5",
        "--out",
        sel_path.to_str().unwrap(),
    ]);
    assert!(status.status.success(), "{status:?}");
    let sel: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&sel_path).unwrap()).unwrap();
    assert_eq!(sel["method"], "mwc");
    assert_eq!(sel["cliques"].as_array().unwrap().len(), 2);
    let selected = sel["selected"].as_array().unwrap().len();
    let rejected = sel["rejected"].as_array().unwrap().len();
    assert_eq!(selected + rejected, 12);
}

#[test]
fn select_baselines_and_missing_args() {
    let dir = tempfile::tempdir().unwrap();
    let train = dir.path().join("train.csv");
    let test = dir.path().join("test.csv");
    run(&[
        "synth", "--classes", "2", "--per-class", "5", "--length", "16", "--seed", "3", "--out",
        train.to_str().unwrap(),
    ]);
    run(&[
        "synth", "--classes", "2", "--per-class", "3", "--length", "16", "--seed", "4", "--out",
        test.to_str().unwrap(),
    ]);

    let out = dir.path().join("lw.json");
    let status = run(&[
        "select",
        "--input",
        train.to_str().unwrap(),
        "--method",
        "lw",
        "--k",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(status.status.success());
    let sel: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(sel["selected"].as_array().unwrap().len(), 4);

    let out = dir.path().join("lrt.json");
    let status = run(&[
        "select",
        "--input",
        train.to_str().unwrap(),
        "--method",
        "lrt",
        "--k",
        "1",
        "--m",
        "2",
        "--test",
        test.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(status.status.success(), "{status:?}");

    // lrt without --test is a configuration error
    let status = run(&[
        "select",
        "--input",
        train.to_str().unwrap(),
        "--method",
        "lrt",
        "--k",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(status.status.code(), Some(2));
}

#[test]
fn exit_codes_for_config_and_data_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m");

    // missing input file -> data error (3)
    let status = run(&[
        "similarity",
        "--input",
        dir.path().join("missing.csv").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(status.status.code(), Some(3));

    // unknown method rejected by clap (2)
    let status = run(&[
        "select",
        "--input",
        dir.path().join("missing.csv").to_str().unwrap(),
        "--method",
        "bogus",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(status.status.code(), Some(2));

    // mass target outside (0, 1) -> config error (2)
    let data = dir.path().join("d.csv");
    run(&[
        "synth", "--classes", "2", "--per-class", "3", "--length", "16", "--seed", "1", "--out",
        data.to_str().unwrap(),
    ]);
    let mstem = dir.path().join("mat");
    run(&[
        "similarity",
        "--input",
        data.to_str().unwrap(),
        "--out",
        mstem.to_str().unwrap(),
    ]);
    let status = run(&[
        "thresholds",
        "--matrix",
        dir.path().join("mat.json").to_str().unwrap(),
        "--targets",
        "1.5",
        "--out",
        dir.path().join("t").to_str().unwrap(),
    ]);
    assert_eq!(status.status.code(), Some(2));

    // malformed row -> data error (3) naming the position
    fs::write(&data, "0,1.0,abc\n").unwrap();
    let status = run(&[
        "similarity",
        "--input",
        data.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(status.status.code(), Some(3));
    let msg = String::from_utf8_lossy(&status.stderr);
    assert!(msg.contains("row 1"), "stderr: {msg}");
    assert!(msg.contains("column 3"), "stderr: {msg}");
}

#[test]
fn evaluate_runs_sweep_and_writes_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("cfg.json");
    fs::write(
        &cfg_path,
        r#"{
            "dataset": {"synth": {"classes": 2, "per_class": 8, "length": 32,
                                   "noise_fraction": 0.2, "seed": 5}},
            "selectors": ["none", "mwc"],
            "deltas": {"mass-targets": [[0.5], [0.2]]},
            "seed": 5,
            "workers": 1
        }"#,
    )
    .unwrap();
    let out = dir.path().join("eval");
    let status = run(&[
        "evaluate",
        "--config",
        cfg_path.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(status.status.success(), "{status:?}");

    let summary = fs::read_to_string(dir.path().join("eval_summary.csv")).unwrap();
    // header + one row per (selector, delta point)
    assert_eq!(summary.lines().count(), 1 + 4);
    let reports: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("eval_report.json")).unwrap())
            .unwrap();
    assert_eq!(reports.as_array().unwrap().len(), 4);
    for r in reports.as_array().unwrap() {
        assert_eq!(r["splits"].as_array().unwrap().len(), 3);
    }
}

#[test]
fn reruns_are_byte_identical_and_worker_invariant() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.csv");
    run(&[
        "synth",
        "--classes",
        "2",
        "--per-class",
        "6",
        "--length",
        "32",
        "--noise-fraction",
        "0.2",
        "--seed",
        "11",
        "--out",
        data.to_str().unwrap(),
    ]);
    let first = read(&data);
    run(&[
        "synth",
        "--classes",
        "2",
        "--per-class",
        "6",
        "--length",
        "32",
        "--noise-fraction",
        "0.2",
        "--seed",
        "11",
        "--out",
        data.to_str().unwrap(),
    ]);
    assert_eq!(first, read(&data));

    let one = dir.path().join("w1");
    let four = dir.path().join("w4");
    run(&[
        "similarity",
        "--input",
        data.to_str().unwrap(),
        "--workers",
        "1",
        "--out",
        one.to_str().unwrap(),
    ]);
    run(&[
        "similarity",
        "--input",
        data.to_str().unwrap(),
        "--workers",
        "4",
        "--out",
        four.to_str().unwrap(),
    ]);
    assert_eq!(
        read(&dir.path().join("w1.csv")),
        read(&dir.path().join("w4.csv"))
    );
    assert_eq!(
        read(&dir.path().join("w1.json")),
        read(&dir.path().join("w4.json"))
    );
}
