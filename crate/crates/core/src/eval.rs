//! Evaluation: decision-agreement metrics, the 1-NN reference classifier,
//! and the repeated hold-out experiment harness.
//!
//! Rand index and F-score are computed over pairwise co-assignment
//! decisions of the predicted vs. true test labels (every unordered test
//! pair is one decision: same class or not). Fleiss' kappa treats each
//! split's test trials as subjects with two ratings each — the method's
//! prediction and the ground truth — and is averaged over splits like the
//! other metrics.

use serde::{Deserialize, Serialize};

use crate::baselines::{grt_select, gw_select, lrt_select, lw_select};
use crate::clique::{class_order_by_size, mwc_select};
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::ingest::{holdout_split, TrialSet};
use crate::scalar::Scalar;
use crate::similarity::{similarity_matrix, SimilarityMatrix, SimilarityParams};
use crate::threshold::{delta_schedule, similarity_distribution};

/// Pairwise decision counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub true_pos: u64,
    pub false_pos: u64,
    pub true_neg: u64,
    pub false_neg: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.true_pos + self.false_pos + self.true_neg + self.false_neg
    }
}

/// Confusion counts over all unordered pairs of decisions: a pair
/// predicted co-assigned and truly co-assigned is a true positive, and
/// so on.
pub fn pairwise_confusion(truth: &[u32], pred: &[u32]) -> ConfusionCounts {
    assert_eq!(truth.len(), pred.len(), "label vectors must align");
    let mut c = ConfusionCounts {
        true_pos: 0,
        false_pos: 0,
        true_neg: 0,
        false_neg: 0,
    };
    for i in 0..truth.len() {
        for j in (i + 1)..truth.len() {
            let same_true = truth[i] == truth[j];
            let same_pred = pred[i] == pred[j];
            match (same_pred, same_true) {
                (true, true) => c.true_pos += 1,
                (true, false) => c.false_pos += 1,
                (false, false) => c.true_neg += 1,
                (false, true) => c.false_neg += 1,
            }
        }
    }
    c
}

/// Fraction of right decisions: `(TP + TN) / total`.
pub fn rand_index<T: Scalar>(c: &ConfusionCounts) -> Result<T> {
    let total = c.total();
    if total == 0 {
        return Err(Error::UndefinedMetric(
            "Rand index over zero decisions".into(),
        ));
    }
    Ok(T::from_f((c.true_pos + c.true_neg) as f64) / T::from_f(total as f64))
}

/// `(1 + beta^2) * p * r / (beta^2 * p + r)` with precision
/// `p = TP / (TP + FP)` and recall `r = TP / (TP + FN)`. An undefined
/// precision or recall is reported as 0 (with a warning) by convention.
pub fn f_score<T: Scalar>(c: &ConfusionCounts, beta: T) -> T {
    if beta < T::zero() {
        // guarded by config validation; treat like beta = 0
        log::warn!("negative beta clamped to 0");
    }
    let beta = beta.max(T::zero());
    if c.true_pos + c.false_pos == 0 || c.true_pos + c.false_neg == 0 {
        log::warn!("F-score undefined (no positive predictions or no positives); reporting 0");
        return T::zero();
    }
    let p = T::from_f(c.true_pos as f64) / T::from_f((c.true_pos + c.false_pos) as f64);
    let r = T::from_f(c.true_pos as f64) / T::from_f((c.true_pos + c.false_neg) as f64);
    let b2 = beta * beta;
    let denom = b2 * p + r;
    if denom == T::zero() {
        return T::zero();
    }
    ((T::one() + b2) * p * r) / denom
}

/// Subjects-by-categories rating counts with a fixed number of ratings
/// per subject.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatingMatrix {
    counts: Vec<Vec<u32>>,
    ratings_per_subject: u32,
}

impl RatingMatrix {
    pub fn new(counts: Vec<Vec<u32>>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::Validation("rating matrix with no subjects".into()));
        }
        let width = counts[0].len();
        let n: u32 = counts[0].iter().sum();
        if n < 2 {
            return Err(Error::Validation(
                "rating matrix needs at least 2 ratings per subject".into(),
            ));
        }
        for (i, row) in counts.iter().enumerate() {
            if row.len() != width {
                return Err(Error::Validation(format!(
                    "rating matrix row {i} has {} categories, expected {width}",
                    row.len()
                )));
            }
            let sum: u32 = row.iter().sum();
            if sum != n {
                return Err(Error::Validation(format!(
                    "rating matrix row {i} sums to {sum}, expected {n}"
                )));
            }
        }
        Ok(Self {
            counts,
            ratings_per_subject: n,
        })
    }

    pub fn subjects(&self) -> usize {
        self.counts.len()
    }

    pub fn categories(&self) -> usize {
        self.counts[0].len()
    }

    pub fn ratings_per_subject(&self) -> u32 {
        self.ratings_per_subject
    }

    pub fn counts(&self) -> &[Vec<u32>] {
        &self.counts
    }
}

/// Chance-corrected agreement over a rating matrix. Equals 1 exactly when
/// every subject's ratings are unanimous; when expected agreement is 1
/// (all mass in one category) the observed agreement is too, and 1 is
/// returned for that degenerate case.
pub fn fleiss_kappa<T: Scalar>(r: &RatingMatrix) -> Result<T> {
    let n_subjects = r.subjects() as f64;
    let n = r.ratings_per_subject() as f64;

    let mut sum_sq = 0.0;
    let mut column_totals = vec![0.0f64; r.categories()];
    for row in r.counts() {
        for (j, &c) in row.iter().enumerate() {
            let c = c as f64;
            sum_sq += c * c;
            column_totals[j] += c;
        }
    }
    let p_bar = (sum_sq - n_subjects * n) / (n_subjects * n * (n - 1.0));
    let p_exp: f64 = column_totals
        .iter()
        .map(|&t| {
            let share = t / (n_subjects * n);
            share * share
        })
        .sum();

    if 1.0 - p_exp <= 0.0 {
        // all ratings in a single category: observed agreement is perfect
        return Ok(T::one());
    }
    Ok(T::from_f((p_bar - p_exp) / (1.0 - p_exp)))
}

/// Two-rater matrix (prediction vs. truth) over the given category list.
pub fn prediction_rating_matrix(
    truth: &[u32],
    pred: &[u32],
    categories: &[u32],
) -> Result<RatingMatrix> {
    assert_eq!(truth.len(), pred.len(), "label vectors must align");
    let index_of = |label: u32| -> Result<usize> {
        categories
            .iter()
            .position(|&c| c == label)
            .ok_or_else(|| Error::Validation(format!("label {label} not in category list")))
    };
    let mut counts = Vec::with_capacity(truth.len());
    for (&t, &p) in truth.iter().zip(pred) {
        let mut row = vec![0u32; categories.len()];
        row[index_of(t)?] += 1;
        row[index_of(p)?] += 1;
        counts.push(row);
    }
    RatingMatrix::new(counts)
}

/// Majority label among the `k` most similar training trials; similarity
/// ties break toward the lower trial id, vote ties toward the lower label.
pub fn knn_classify<T: Scalar>(
    train: &TrialSet<T>,
    test: &TrialSet<T>,
    k: usize,
    mu: &SimilarityMatrix<T>,
) -> Result<Vec<u32>> {
    if train.is_empty() {
        return Err(Error::EmptyInput("classification with no training trials".into()));
    }
    if k == 0 || k > train.len() {
        return Err(Error::Config(format!(
            "k = {k} must be in [1, {}]",
            train.len()
        )));
    }
    let mut preds = Vec::with_capacity(test.len());
    for t in test.trials() {
        let mut scored: Vec<(T, u64, u32)> = train
            .trials()
            .iter()
            .map(|tr| Ok((mu.get_by_id(tr.id, t.id)?, tr.id, tr.label)))
            .collect::<Result<_>>()?;
        scored.sort_by(|a, b| {
            b.0.partial_cmp(&a.0)
                .expect("similarities are finite")
                .then_with(|| a.1.cmp(&b.1))
        });
        let mut votes: std::collections::BTreeMap<u32, usize> = std::collections::BTreeMap::new();
        for (_, _, label) in scored.iter().take(k) {
            *votes.entry(*label).or_insert(0) += 1;
        }
        let (winner, _) = votes
            .iter()
            .fold(None::<(u32, usize)>, |acc, (&label, &count)| match acc {
                Some((_, best)) if count <= best => acc,
                _ => Some((label, count)),
            })
            .expect("k >= 1 yields at least one vote");
        preds.push(winner);
    }
    Ok(preds)
}

/// Training-set selectors available to the harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Selector {
    /// Per-class maximum-weight cliques.
    Mwc,
    /// Per-class medoid neighbourhoods.
    Lw,
    /// Global medoid neighbourhood.
    Gw,
    /// Per-class nearest-to-test union.
    Lrt,
    /// Label-blind nearest-to-test union.
    Grt,
    /// Keep the whole training set.
    None,
}

impl std::fmt::Display for Selector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Selector::Mwc => "mwc",
            Selector::Lw => "lw",
            Selector::Gw => "gw",
            Selector::Lrt => "lrt",
            Selector::Grt => "grt",
            Selector::None => "none",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Selector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mwc" => Ok(Selector::Mwc),
            "lw" => Ok(Selector::Lw),
            "gw" => Ok(Selector::Gw),
            "lrt" => Ok(Selector::Lrt),
            "grt" => Ok(Selector::Grt),
            "none" => Ok(Selector::None),
            other => Err(Error::Config(format!("unknown selector {other:?}"))),
        }
    }
}

/// Where the per-class thresholds come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeltaSpec<T> {
    /// Thresholds given directly (extended one bin down per missing
    /// class when fewer than the class count).
    Explicit(Vec<T>),
    /// Strictly ascending cumulative-mass targets resolved against the
    /// similarity histogram.
    MassTargets(Vec<T>),
}

/// Full experiment configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig<T> {
    pub selector: Selector,
    pub lambda: T,
    pub q: usize,
    /// Histogram bin width for threshold selection.
    pub interval: T,
    pub delta: DeltaSpec<T>,
    pub beta: T,
    pub k_nn: usize,
    pub ratio: (u32, u32),
    pub repetitions: usize,
    pub seed: u64,
}

impl<T: Scalar> ExperimentConfig<T> {
    pub fn new(selector: Selector, delta: DeltaSpec<T>, seed: u64) -> Self {
        Self {
            selector,
            lambda: T::from_f(0.5),
            q: 1,
            interval: T::from_f(0.05),
            delta,
            beta: T::one(),
            k_nn: 1,
            ratio: (2, 1),
            repetitions: 3,
            seed,
        }
    }
}

/// Metrics of one split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitMetrics<T> {
    pub repetition: usize,
    pub train_size: usize,
    pub test_size: usize,
    pub selected: usize,
    pub rand_index: T,
    pub f_score: T,
    pub kappa: T,
}

/// Metric means over the splits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanMetrics<T> {
    pub rand_index: T,
    pub f_score: T,
    pub kappa: T,
    pub selected: T,
}

/// Per-experiment report: configuration echo, per-split metrics and the
/// averaged values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport<T> {
    pub config: ExperimentConfig<T>,
    /// Thresholds actually used (one per class), when the selector
    /// consumes thresholds.
    pub deltas: Vec<T>,
    pub warnings: Vec<String>,
    pub splits: Vec<SplitMetrics<T>>,
    pub mean: MeanMetrics<T>,
}

impl<T: Scalar + Serialize> EvalReport<T> {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Extends (or validates) a threshold list to one entry per class:
/// missing entries step one histogram bin below the last, surplus is an
/// error.
pub fn resolve_deltas<T: Scalar>(
    base: &[T],
    n_classes: usize,
    interval: T,
) -> Result<(Vec<T>, Vec<String>)> {
    if base.is_empty() {
        return Err(Error::Config("no thresholds given".into()));
    }
    if base.len() > n_classes {
        return Err(Error::Config(format!(
            "{} thresholds for {} classes",
            base.len(),
            n_classes
        )));
    }
    let mut prev = T::one();
    for &d in base {
        if !(d >= T::zero() && d < prev) {
            return Err(Error::Config(format!(
                "thresholds must be strictly descending within [0, 1), got {d} after {prev}"
            )));
        }
        prev = d;
    }
    let mut deltas = base.to_vec();
    let mut warnings = Vec::new();
    while deltas.len() < n_classes {
        let next = *deltas.last().expect("non-empty") - interval;
        if next < T::zero() {
            return Err(Error::Schedule(format!(
                "cannot extend the threshold list below 0 (needed {} for {} classes)",
                n_classes - deltas.len(),
                n_classes
            )));
        }
        warnings.push(format!(
            "only {} threshold(s) for {} classes; appended {next}",
            base.len(),
            n_classes
        ));
        deltas.push(next);
    }
    Ok((deltas, warnings))
}

/// Derives the selection id list for one split.
#[allow(clippy::too_many_arguments)]
fn select_for_split<T: Scalar>(
    selector: Selector,
    train_set: &TrialSet<T>,
    test_set: &TrialSet<T>,
    graph: &WeightedGraph<T>,
    deltas: &[T],
    class_order: &[u32],
    mu: &SimilarityMatrix<T>,
) -> Result<Vec<u64>> {
    if selector == Selector::None {
        return Ok(train_set.ids());
    }
    // The clique selection drives both its own branch and the matched
    // counts handed to the baselines.
    let mwc = mwc_select(graph, deltas, class_order)?;
    let budget = mwc.selected.len().max(1);
    match selector {
        Selector::Mwc => Ok(mwc.selected),
        Selector::Lw => {
            // per-class share of the clique budget, rounded to the nearest
            let n_classes = class_order.len().max(1);
            let k = ((budget as f64 / n_classes as f64).round() as usize).max(1);
            lw_select(train_set, mu, k)
        }
        Selector::Gw => gw_select(train_set, mu, budget),
        Selector::Lrt => {
            let cap = train_set
                .ids_by_class()
                .values()
                .map(|v| v.len())
                .min()
                .unwrap_or(1);
            let mut chosen = lrt_select(train_set, test_set, mu, 1, 1)?;
            let mut k = 1;
            while chosen.len() < budget && k < cap {
                k += 1;
                chosen = lrt_select(train_set, test_set, mu, k, k)?;
            }
            Ok(chosen)
        }
        Selector::Grt => {
            let cap = train_set.len();
            let mut chosen = grt_select(train_set, test_set, mu, 1, 1)?;
            let mut k = 1;
            while chosen.len() < budget && k < cap {
                k += 1;
                chosen = grt_select(train_set, test_set, mu, k, k)?;
            }
            Ok(chosen)
        }
        Selector::None => unreachable!("handled above"),
    }
}

/// Runs the full protocol: stratified splits, per-split selection on the
/// training part, 1-NN classification of the test part over the selected
/// trials, and averaged metrics.
///
/// The similarity matrix is computed once over the whole set; selection
/// and classification read restrictions of it, so every selector sees the
/// same metric. Thresholds from mass targets are resolved against the
/// whole-set histogram.
pub fn run_experiment<T: Scalar>(
    set: &TrialSet<T>,
    cfg: &ExperimentConfig<T>,
) -> Result<EvalReport<T>> {
    if set.classes().len() < 2 {
        return Err(Error::Config(
            "selection experiments need at least 2 classes".into(),
        ));
    }
    if cfg.k_nn == 0 {
        return Err(Error::Config("k_nn must be >= 1".into()));
    }
    if cfg.beta < T::zero() {
        return Err(Error::Config("beta must be >= 0".into()));
    }
    let params = SimilarityParams::new(cfg.lambda, cfg.q);
    let mu = similarity_matrix(set, &params)?;

    let n_classes = set.classes().len();
    let mut warnings = Vec::new();
    let deltas = match &cfg.delta {
        DeltaSpec::Explicit(d) => {
            let (resolved, w) = resolve_deltas(d, n_classes, cfg.interval)?;
            warnings.extend(w);
            resolved
        }
        DeltaSpec::MassTargets(targets) => {
            let hist = similarity_distribution(&mu, cfg.interval)?;
            let schedule = delta_schedule(&hist, targets)?;
            warnings.extend(schedule.warnings);
            let (resolved, w) = resolve_deltas(&schedule.deltas, n_classes, cfg.interval)?;
            warnings.extend(w);
            resolved
        }
    };

    let plans = holdout_split(set, cfg.ratio, cfg.repetitions, cfg.seed)?;
    let categories: Vec<u32> = set.classes().into_iter().collect();

    let mut splits = Vec::with_capacity(plans.len());
    for plan in &plans {
        let train_set = set.subset(&plan.train)?;
        let test_set = set.subset(&plan.test)?;
        let mu_train = mu.restrict(&plan.train)?;
        let graph = WeightedGraph::build(&train_set, mu_train)?;
        let class_order = class_order_by_size(&graph);

        let selected_ids = select_for_split(
            cfg.selector,
            &train_set,
            &test_set,
            &graph,
            &deltas,
            &class_order,
            &mu,
        )?;
        let selected_set = train_set.subset(&selected_ids)?;
        let k = cfg.k_nn.min(selected_set.len());
        let preds = knn_classify(&selected_set, &test_set, k, &mu)?;
        let truth: Vec<u32> = test_set.trials().iter().map(|t| t.label).collect();

        let confusion = pairwise_confusion(&truth, &preds);
        let ri = rand_index(&confusion)?;
        let f = f_score(&confusion, cfg.beta);
        let ratings = prediction_rating_matrix(&truth, &preds, &categories)?;
        let kappa = fleiss_kappa(&ratings)?;

        splits.push(SplitMetrics {
            repetition: plan.repetition,
            train_size: plan.train.len(),
            test_size: plan.test.len(),
            selected: selected_ids.len(),
            rand_index: ri,
            f_score: f,
            kappa,
        });
    }

    let count = T::from_count(splits.len());
    let mean = MeanMetrics {
        rand_index: splits
            .iter()
            .fold(T::zero(), |acc, s| acc + s.rand_index)
            / count,
        f_score: splits.iter().fold(T::zero(), |acc, s| acc + s.f_score) / count,
        kappa: splits.iter().fold(T::zero(), |acc, s| acc + s.kappa) / count,
        selected: splits
            .iter()
            .fold(T::zero(), |acc, s| acc + T::from_count(s.selected))
            / count,
    };

    Ok(EvalReport {
        config: cfg.clone(),
        deltas,
        warnings,
        splits,
        mean,
    })
}
