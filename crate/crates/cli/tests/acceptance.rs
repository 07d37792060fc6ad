//! Acceptance suite: one test per release criterion, each printing a
//! PASS line on success (run with `--nocapture` to see them).
//!
//! The numeric criteria pin every tolerance in code; the trend criteria
//! run the full experiment harness over 20 synthetic seeds.

use std::collections::BTreeSet;
use std::process::Command;
use std::time::Instant;

use cliquesel_core::clique::{
    class_order_by_size, grow_clique, grow_clique_traced, mwc_select, pair_weight,
};
use cliquesel_core::eval::{
    f_score, fleiss_kappa, rand_index, run_experiment, DeltaSpec, ExperimentConfig, RatingMatrix,
    Selector,
};
use cliquesel_core::graph::{prune_edges, WeightedGraph};
use cliquesel_core::ingest::{holdout_split, synth_trials, SynthConfig, Trial, TrialSet};
use cliquesel_core::similarity::{discrete_frechet, SimilarityMatrix};
use cliquesel_core::threshold::{select_threshold, similarity_distribution, SimilarityHistogram};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn pass(name: &str) {
    println!("acceptance: {name} ... PASS");
}

// -------------------------------------------------------------------------
// shared fixtures
// -------------------------------------------------------------------------

fn random_labeled_graph(n: usize, classes: u32, seed: u64) -> WeightedGraph<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels: Vec<u32> = (0..n)
        .map(|i| {
            if (i as u32) < classes {
                i as u32
            } else {
                rng.gen_range(0..classes)
            }
        })
        .collect();
    let mut rows = vec![vec![1.0; n]; n];
    for i in 0..n {
        for j in 0..i {
            let v: f64 = rng.gen_range(0.0..=1.0);
            rows[i][j] = v;
            rows[j][i] = v;
        }
    }
    let mu = SimilarityMatrix::from_rows((0..n as u64).collect(), rows).unwrap();
    let trials: Vec<Trial<f64>> = labels
        .iter()
        .enumerate()
        .map(|(i, &l)| Trial::new(i as u64, l, vec![0.0, 1.0]).unwrap())
        .collect();
    WeightedGraph::build(&TrialSet::new(trials).unwrap(), mu).unwrap()
}

fn clique_weight_from_scratch(g: &WeightedGraph<f64>, members: &[u64]) -> f64 {
    let idx: Vec<usize> = members.iter().map(|&m| g.index_of(m).unwrap()).collect();
    let mut w: f64 = idx.iter().map(|&i| g.eta()[i]).sum();
    for (a, &i) in idx.iter().enumerate() {
        for &j in &idx[..a] {
            w += g.mu().get(i, j);
        }
    }
    w
}

// -------------------------------------------------------------------------
// criterion: Fréchet oracle
// -------------------------------------------------------------------------

fn frechet_by_enumeration(a: &[f64], b: &[f64]) -> f64 {
    fn walk(a: &[f64], b: &[f64], i: usize, j: usize, acc: f64) -> f64 {
        let acc = acc.max((a[i] - b[j]).abs());
        if i == a.len() - 1 && j == b.len() - 1 {
            return acc;
        }
        let mut best = f64::INFINITY;
        if i + 1 < a.len() {
            best = best.min(walk(a, b, i + 1, j, acc));
        }
        if j + 1 < b.len() {
            best = best.min(walk(a, b, i, j + 1, acc));
        }
        if i + 1 < a.len() && j + 1 < b.len() {
            best = best.min(walk(a, b, i + 1, j + 1, acc));
        }
        best
    }
    walk(a, b, 0, 0, 0.0)
}

#[test]
fn frechet_matches_exhaustive_coupling_enumeration() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..500 {
        let la = rng.gen_range(1..=6);
        let lb = rng.gen_range(1..=6);
        let a: Vec<f64> = (0..la).map(|_| rng.gen_range(-9..=9) as f64).collect();
        let b: Vec<f64> = (0..lb).map(|_| rng.gen_range(-9..=9) as f64).collect();
        let dp = discrete_frechet(&a, &b).unwrap();
        let brute = frechet_by_enumeration(&a, &b);
        assert_eq!(dp, brute, "case {case}: a={a:?} b={b:?}");
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "oracle took {elapsed:?}");
    pass("discrete Fréchet equals coupling enumeration on 500 random pairs");
}

// -------------------------------------------------------------------------
// criteria: clique weight identities and selection structure
// -------------------------------------------------------------------------

#[test]
fn pair_weight_sum_identity_on_random_graphs() {
    let mut checked = 0;
    for seed in 0..100 {
        let n = 5 + (seed as usize % 26); // up to 30 vertices
        let g = random_labeled_graph(n, 3, seed);
        let order = class_order_by_size(&g);
        let deltas = [0.6, 0.45, 0.3];
        let result = mwc_select(&g, &deltas[..order.len()], &order).unwrap();
        for clique in &result.cliques {
            if clique.members.len() < 2 {
                continue;
            }
            let mut pair_sum = 0.0;
            for (a, &i) in clique.members.iter().enumerate() {
                for &j in &clique.members[..a] {
                    pair_sum +=
                        pair_weight(&g, i, j, clique.members.len(), clique.delta).unwrap();
                }
            }
            let direct = clique_weight_from_scratch(&g, &clique.members);
            assert!(
                (pair_sum - direct).abs() < 1e-9,
                "seed {seed}: pair-weight sum {pair_sum} != vertex+edge sum {direct}"
            );
            checked += 1;
        }
    }
    assert!(checked >= 100, "only {checked} cliques checked");
    pass("pair-weight sum equals vertex+edge weight on 100 random graphs");
}

#[test]
fn admissions_strictly_increase_weight_by_the_stated_gain() {
    let mut admissions = 0;
    for seed in 0..100 {
        let n = 5 + (seed as usize % 26);
        let g = random_labeled_graph(n, 3, seed);
        for (label, delta) in [(0u32, 0.6), (1, 0.45), (2, 0.3)] {
            let view = prune_edges(&g, delta).unwrap();
            let (clique, trace) = grow_clique_traced(&view, label).unwrap();
            // replay: recompute clique weights from scratch at every step
            let order: Vec<u64> = {
                // member order of admission: seed is the member not in the trace
                let admitted: BTreeSet<u64> = trace.iter().map(|a| a.vertex).collect();
                let seed_vertex = clique
                    .members
                    .iter()
                    .copied()
                    .find(|m| !admitted.contains(m))
                    .expect("seed vertex");
                std::iter::once(seed_vertex)
                    .chain(trace.iter().map(|a| a.vertex))
                    .collect()
            };
            for (step, adm) in trace.iter().enumerate() {
                let before: Vec<u64> = order[..step + 1].to_vec();
                let after: Vec<u64> = order[..step + 2].to_vec();
                let w_before = clique_weight_from_scratch(&g, &before);
                let w_after = clique_weight_from_scratch(&g, &after);
                assert!(w_after > w_before, "admission must strictly increase weight");
                assert!(
                    (w_after - w_before - adm.gain).abs() < 1e-9,
                    "gain mismatch: {} vs {}",
                    w_after - w_before,
                    adm.gain
                );
                assert!((adm.weight_before - w_before).abs() < 1e-9);
                admissions += 1;
            }
        }
    }
    assert!(admissions > 200, "only {admissions} admissions observed");
    pass("every admission strictly increases clique weight by eta_v + sum(mu_iv)");
}

#[test]
fn multi_class_selection_equals_sequential_growth() {
    for seed in 0..50 {
        let n = 8 + (seed as usize % 23);
        let g = random_labeled_graph(n, 3, 500 + seed);
        let order = class_order_by_size(&g);
        let deltas = [0.6, 0.45, 0.3];
        let result = mwc_select(&g, &deltas[..order.len()], &order).unwrap();

        // oracle: explicit sequential per-class growth on shrinking views
        let mut removed: Vec<u64> = Vec::new();
        for (k, (&label, &delta)) in order.iter().zip(&deltas).enumerate() {
            let view = g.view(delta).unwrap().excluding(&removed).unwrap();
            let clique = grow_clique(&view, label).unwrap();
            assert_eq!(
                clique.members, result.cliques[k].members,
                "seed {seed} class {label}: member sets differ"
            );
            removed.extend_from_slice(&clique.members);
        }
    }
    pass("multi-class selection equals sequential per-class growth on 50 instances");
}

#[test]
fn output_cliques_are_valid_and_disjoint() {
    let mut cliques_checked = 0;
    for seed in 0..60 {
        let n = 6 + (seed as usize % 25);
        let g = random_labeled_graph(n, 3, 900 + seed);
        let order = class_order_by_size(&g);
        let deltas = [0.65, 0.5, 0.35];
        let result = mwc_select(&g, &deltas[..order.len()], &order).unwrap();
        let mut seen: BTreeSet<u64> = BTreeSet::new();
        for clique in &result.cliques {
            for (a, &i) in clique.members.iter().enumerate() {
                assert!(seen.insert(i), "vertex {i} appears in two cliques");
                let ii = g.index_of(i).unwrap();
                assert_eq!(g.labels()[ii], clique.label);
                for &j in &clique.members[..a] {
                    let jj = g.index_of(j).unwrap();
                    assert!(
                        g.mu().get(ii, jj) >= clique.delta,
                        "pair ({i}, {j}) below the clique threshold"
                    );
                }
            }
            cliques_checked += 1;
        }
    }
    assert!(cliques_checked >= 150);
    pass("zero output cliques contain a pair below their threshold; cliques disjoint");
}

// -------------------------------------------------------------------------
// criteria: threshold selection
// -------------------------------------------------------------------------

fn random_histogram(seed: u64) -> SimilarityHistogram<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let counts: Vec<u64> = (0..20).map(|_| rng.gen_range(0..50)).collect();
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return random_histogram(seed + 10_000);
    }
    SimilarityHistogram::from_counts(0.05, counts).unwrap()
}

#[test]
fn larger_mass_target_gives_smaller_threshold_with_tight_coverage() {
    for seed in 0..50 {
        let h = random_histogram(seed);
        let targets = [0.05, 0.15, 0.3, 0.5, 0.7, 0.9];
        let mut prev = f64::INFINITY;
        for &a in &targets {
            let d = select_threshold(&h, a).unwrap();
            assert!(d <= prev, "seed {seed}: threshold rose as the target grew");
            prev = d;

            // coverage: mass at or above the returned threshold is in
            // [A, A + one-bin mass)
            let bin = (0..h.bins())
                .find(|&b| (h.lower_edge(b) - d).abs() < 1e-12)
                .expect("threshold is a bin edge");
            let coverage: f64 = (bin..h.bins()).map(|b| h.density(b)).sum();
            assert!(coverage >= a - 1e-12, "seed {seed}: coverage {coverage} < {a}");
            assert!(
                coverage < a + h.density(bin) + 1e-12,
                "seed {seed}: coverage {coverage} >= {a} + bin mass"
            );
        }
    }
    pass("a larger mass target never raises the threshold; coverage within one bin");
}

#[test]
fn histogram_densities_sum_to_one() {
    for seed in 0..30 {
        let n = 3 + (seed as usize % 10);
        let g = random_labeled_graph(n, 2, 1300 + seed);
        let h = similarity_distribution(g.mu(), 0.05).unwrap();
        let sum: f64 = h.densities().iter().sum();
        assert!(
            (sum - 1.0).abs() < 1e-12,
            "seed {seed}: densities sum to {sum}"
        );
        assert_eq!(h.n_total(), (n * n) as u64);
    }
    pass("histogram densities sum to 1 within 1e-12 (n^2 denominator)");
}

// -------------------------------------------------------------------------
// criterion: stratified split counts
// -------------------------------------------------------------------------

#[test]
fn holdout_counts_match_reference_tables() {
    fn fixture(n0: usize, n1: usize) -> TrialSet<f64> {
        let trials = (0..n0 + n1)
            .map(|i| {
                let label = if i < n0 { 0 } else { 1 };
                Trial::new(i as u64, label, vec![0.0, 1.0, 2.0]).unwrap()
            })
            .collect();
        TrialSet::new(trials).unwrap()
    }

    let set = fixture(135, 133); // 268 trials
    for plan in holdout_split(&set, (2, 1), 3, 42).unwrap() {
        assert!(
            (plan.train.len() as i64 - 180).abs() <= 2,
            "train {} not within one trial per class of 180",
            plan.train.len()
        );
        assert!((plan.test.len() as i64 - 88).abs() <= 2);
    }

    let set = fixture(100, 100); // 200 trials
    for plan in holdout_split(&set, (2, 1), 3, 42).unwrap() {
        assert!((plan.train.len() as i64 - 134).abs() <= 2);
        assert!((plan.test.len() as i64 - 66).abs() <= 2);
    }
    pass("2:1 hold-out yields 180:88 on 268 trials and 134:66 on 200 (within one per class)");
}

// -------------------------------------------------------------------------
// criteria: trend experiments on the synthetic family
// -------------------------------------------------------------------------

fn trend_set(seed: u64) -> TrialSet<f64> {
    synth_trials(&SynthConfig {
        classes: 2,
        per_class: 20,
        length: 64,
        noise_fraction: 0.2,
        seed,
    })
    .unwrap()
}

#[test]
fn selection_beats_no_selection_and_baselines() {
    let start = Instant::now();
    let selectors = [
        Selector::None,
        Selector::Mwc,
        Selector::Lw,
        Selector::Gw,
        Selector::Lrt,
        Selector::Grt,
    ];
    let mut per_seed: Vec<Vec<f64>> = Vec::new();
    for seed in 0..20u64 {
        let set = trend_set(seed);
        let row: Vec<f64> = selectors
            .iter()
            .map(|&sel| {
                let cfg = ExperimentConfig::new(sel, DeltaSpec::MassTargets(vec![0.5]), seed);
                run_experiment(&set, &cfg).unwrap().mean.rand_index
            })
            .collect();
        per_seed.push(row);
    }
    let mean = |i: usize| per_seed.iter().map(|r| r[i]).sum::<f64>() / per_seed.len() as f64;
    let gain = mean(1) - mean(0);
    assert!(
        gain >= 0.05,
        "clique selection gained only {gain:.4} mean Rand index over no selection"
    );
    for (idx, name) in [(2, "lw"), (3, "gw"), (4, "lrt"), (5, "grt")] {
        let wins = per_seed.iter().filter(|r| r[1] > r[idx]).count();
        assert!(
            wins * 5 >= per_seed.len() * 3,
            "clique selection beat {name} on only {wins}/20 seeds"
        );
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 60.0,
        "trend suite took {elapsed:?}, budget is 60 s"
    );
    pass("selection lifts mean 1-NN Rand index by >= 0.05 and beats every baseline on >= 60% of seeds");
}

#[test]
fn moderate_threshold_beats_strict_threshold() {
    let mut ok = 0;
    for seed in 0..20u64 {
        let set = trend_set(seed);
        let moderate = run_experiment(
            &set,
            &ExperimentConfig::new(Selector::Mwc, DeltaSpec::MassTargets(vec![0.5]), seed),
        )
        .unwrap()
        .mean
        .rand_index;
        let strict = run_experiment(
            &set,
            &ExperimentConfig::new(Selector::Mwc, DeltaSpec::MassTargets(vec![0.1]), seed),
        )
        .unwrap()
        .mean
        .rand_index;
        if moderate >= strict {
            ok += 1;
        }
    }
    assert!(
        ok * 5 >= 20 * 4,
        "moderate threshold matched or beat the strict one on only {ok}/20 seeds"
    );
    pass("a moderate threshold beats the strictest swept threshold on >= 80% of seeds");
}

// -------------------------------------------------------------------------
// criterion: metric formula oracles
// -------------------------------------------------------------------------

#[test]
fn metric_formulas_match_independent_oracles() {
    let mut rng = ChaCha8Rng::seed_from_u64(31337);
    for _ in 0..100 {
        let c = cliquesel_core::eval::ConfusionCounts {
            true_pos: rng.gen_range(0..40),
            false_pos: rng.gen_range(0..40),
            true_neg: rng.gen_range(0..40),
            false_neg: rng.gen_range(0..40),
        };
        if c.total() == 0 {
            continue;
        }
        let ri: f64 = rand_index(&c).unwrap();
        let expected_ri =
            (c.true_pos + c.true_neg) as f64 / (c.true_pos + c.true_neg + c.false_pos + c.false_neg) as f64;
        assert!((ri - expected_ri).abs() < 1e-12);

        let beta: f64 = rng.gen_range(0.0..3.0);
        let f: f64 = f_score(&c, beta);
        let expected_f = if c.true_pos + c.false_pos == 0 || c.true_pos + c.false_neg == 0 {
            0.0
        } else {
            let p = c.true_pos as f64 / (c.true_pos + c.false_pos) as f64;
            let r = c.true_pos as f64 / (c.true_pos + c.false_neg) as f64;
            if beta * beta * p + r == 0.0 {
                0.0
            } else {
                (1.0 + beta * beta) * p * r / (beta * beta * p + r)
            }
        };
        assert!((f - expected_f).abs() < 1e-12);
    }

    // kappa on random rating matrices
    for _ in 0..100 {
        let subjects = rng.gen_range(2..12);
        let categories = rng.gen_range(2..5);
        let ratings = rng.gen_range(2..6);
        let counts: Vec<Vec<u32>> = (0..subjects)
            .map(|_| {
                let mut row = vec![0u32; categories];
                for _ in 0..ratings {
                    let j = rng.gen_range(0..categories);
                    row[j] += 1;
                }
                row
            })
            .collect();
        let r = RatingMatrix::new(counts.clone()).unwrap();
        let kappa: f64 = fleiss_kappa(&r).unwrap();

        let n_subjects = subjects as f64;
        let n = ratings as f64;
        let sum_sq: f64 = counts
            .iter()
            .flat_map(|row| row.iter())
            .map(|&c| (c as f64) * (c as f64))
            .sum();
        let p_bar = (sum_sq - n_subjects * n) / (n_subjects * n * (n - 1.0));
        let p_exp: f64 = (0..categories)
            .map(|j| {
                let col: f64 = counts.iter().map(|row| row[j] as f64).sum();
                (col / (n_subjects * n)).powi(2)
            })
            .sum();
        if 1.0 - p_exp <= 0.0 {
            assert_eq!(kappa, 1.0);
        } else {
            let expected = (p_bar - p_exp) / (1.0 - p_exp);
            assert!((kappa - expected).abs() < 1e-12);
            assert!(kappa <= 1.0 + 1e-12);
        }
    }

    // unanimity gives exactly 1
    let unanimous = RatingMatrix::new(vec![vec![3, 0], vec![0, 3], vec![3, 0]]).unwrap();
    assert_eq!(fleiss_kappa::<f64>(&unanimous).unwrap(), 1.0);

    pass("Rand index, F-score and Fleiss' kappa match formula oracles within 1e-12");
}

// -------------------------------------------------------------------------
// criterion: CLI determinism
// -------------------------------------------------------------------------

#[test]
fn cli_outputs_are_deterministic_and_worker_invariant() {
    let dir = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_cliquesel");
    let run = |args: &[&str]| {
        let out = Command::new(bin).args(args).output().expect("binary runs");
        assert!(
            out.status.success(),
            "command {args:?} failed: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    };
    let read = |name: &str| std::fs::read(dir.path().join(name)).unwrap();

    let data = dir.path().join("data.csv");
    let synth_args: Vec<String> = [
        "synth",
        "--classes",
        "2",
        "--per-class",
        "8",
        "--length",
        "32",
        "--noise-fraction",
        "0.25",
        "--seed",
        "9",
        "--out",
    ]
    .iter()
    .map(|s| s.to_string())
    .chain([data.to_str().unwrap().to_string()])
    .collect();
    let synth_args: Vec<&str> = synth_args.iter().map(|s| s.as_str()).collect();
    run(&synth_args);
    let first = read("data.csv");
    run(&synth_args);
    assert_eq!(first, read("data.csv"), "synth rerun changed bytes");

    // similarity: identical across reruns and across worker counts
    for (stem, workers) in [("a", "1"), ("b", "1"), ("c", "4")] {
        run(&[
            "similarity",
            "--input",
            data.to_str().unwrap(),
            "--workers",
            workers,
            "--out",
            dir.path().join(stem).to_str().unwrap(),
        ]);
    }
    assert_eq!(read("a.csv"), read("b.csv"), "similarity rerun changed bytes");
    assert_eq!(read("a.csv"), read("c.csv"), "worker count changed bytes");
    assert_eq!(read("a.json"), read("c.json"));

    // thresholds, select and evaluate: byte-identical reruns
    for stem in ["t1", "t2"] {
        run(&[
            "thresholds",
            "--matrix",
            dir.path().join("a.json").to_str().unwrap(),
            "--targets",
            "0.3,0.6",
            "--out",
            dir.path().join(stem).to_str().unwrap(),
        ]);
    }
    assert_eq!(read("t1_histogram.csv"), read("t2_histogram.csv"));
    assert_eq!(read("t1_deltas.json"), read("t2_deltas.json"));

    for name in ["s1.json", "s2.json"] {
        run(&[
            "select",
            "--input",
            data.to_str().unwrap(),
            "--method",
            "mwc",
            "--targets",
            "0.5",
            "--out",
            dir.path().join(name).to_str().unwrap(),
        ]);
    }
    assert_eq!(read("s1.json"), read("s2.json"));

    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        format!(
            r#"{{
                "dataset": {{"file": {{"path": {:?}}}}},
                "selectors": ["none", "mwc"],
                "deltas": {{"mass-targets": [[0.5]]}},
                "seed": 9,
                "workers": 1
            }}"#,
            data.to_str().unwrap()
        ),
    )
    .unwrap();
    for stem in ["e1", "e2"] {
        run(&[
            "evaluate",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            dir.path().join(stem).to_str().unwrap(),
        ]);
    }
    assert_eq!(read("e1_report.json"), read("e2_report.json"));
    assert_eq!(read("e1_summary.csv"), read("e2_summary.csv"));

    pass("CLI reruns are byte-identical; similarity matrix invariant under worker count");
}
