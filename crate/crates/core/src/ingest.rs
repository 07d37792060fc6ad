//! Loading, validating, synthesizing and splitting labeled time-series
//! trials.
//!
//! The on-disk interchange format is a plain numeric CSV, one trial per
//! row: `label, v1, v2, ..., vL`. A header row is auto-detected (first
//! cell not numeric) and skipped. The `labeled-dir` layout stores one
//! file per class (filename stem = label) whose rows carry samples only.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Read;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// One labeled time series: a single trial treated as one curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trial<T> {
    pub id: u64,
    pub label: u32,
    pub samples: Vec<T>,
}

impl<T: Scalar> Trial<T> {
    /// Validates finiteness and minimum length (two samples, so a
    /// difference sequence exists).
    pub fn new(id: u64, label: u32, samples: Vec<T>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::Validation(format!(
                "trial {id} has {} sample(s); at least 2 required",
                samples.len()
            )));
        }
        if let Some(pos) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::Validation(format!(
                "trial {id} has a non-finite sample at position {pos}"
            )));
        }
        Ok(Self { id, label, samples })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// An ordered collection of trials with unique ids.
///
/// `noise_ids` marks synthesized unstructured trials; it is side metadata
/// from the generator and is not part of the CSV interchange format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSet<T> {
    trials: Vec<Trial<T>>,
    #[serde(default)]
    noise_ids: BTreeSet<u64>,
}

impl<T: Scalar> TrialSet<T> {
    pub fn new(trials: Vec<Trial<T>>) -> Result<Self> {
        Self::with_noise_ids(trials, BTreeSet::new())
    }

    pub fn with_noise_ids(trials: Vec<Trial<T>>, noise_ids: BTreeSet<u64>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for t in &trials {
            if !seen.insert(t.id) {
                return Err(Error::Validation(format!("duplicate trial id {}", t.id)));
            }
        }
        for id in &noise_ids {
            if !seen.contains(id) {
                return Err(Error::Validation(format!(
                    "noise marker references unknown trial id {id}"
                )));
            }
        }
        Ok(Self { trials, noise_ids })
    }

    pub fn trials(&self) -> &[Trial<T>] {
        &self.trials
    }

    pub fn len(&self) -> usize {
        self.trials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trials.is_empty()
    }

    /// Distinct class labels present, ascending.
    pub fn classes(&self) -> BTreeSet<u32> {
        self.trials.iter().map(|t| t.label).collect()
    }

    /// Ids of synthesized unstructured ("invalid") trials.
    pub fn noise_ids(&self) -> &BTreeSet<u64> {
        &self.noise_ids
    }

    pub fn ids(&self) -> Vec<u64> {
        self.trials.iter().map(|t| t.id).collect()
    }

    pub fn by_id(&self, id: u64) -> Option<&Trial<T>> {
        self.trials.iter().find(|t| t.id == id)
    }

    /// Trial ids grouped by class, ascending label order; ids keep trial
    /// order within each class.
    pub fn ids_by_class(&self) -> BTreeMap<u32, Vec<u64>> {
        let mut map: BTreeMap<u32, Vec<u64>> = BTreeMap::new();
        for t in &self.trials {
            map.entry(t.label).or_default().push(t.id);
        }
        map
    }

    pub fn min_len(&self) -> usize {
        self.trials.iter().map(|t| t.len()).min().unwrap_or(0)
    }

    /// New set containing the trials with the given ids, in the given
    /// order. Noise markers are carried over for retained trials.
    pub fn subset(&self, ids: &[u64]) -> Result<Self> {
        let mut trials = Vec::with_capacity(ids.len());
        for &id in ids {
            let t = self
                .by_id(id)
                .ok_or_else(|| Error::IdMismatch(format!("trial id {id} not in set")))?;
            trials.push(t.clone());
        }
        let noise = ids
            .iter()
            .filter(|id| self.noise_ids.contains(id))
            .copied()
            .collect();
        Self::with_noise_ids(trials, noise)
    }
}

/// Picks one channel out of interleaved multi-channel rows.
///
/// A row with `channels` channels holds each channel's samples as one
/// contiguous block; `channel` selects the block to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub channels: usize,
    pub channel: usize,
}

impl ChannelSpec {
    pub fn validate(&self) -> Result<()> {
        if self.channels == 0 {
            return Err(Error::Config("channel count must be positive".into()));
        }
        if self.channel >= self.channels {
            return Err(Error::Config(format!(
                "channel index {} out of range for {} channel(s)",
                self.channel, self.channels
            )));
        }
        Ok(())
    }
}

/// Input layouts understood by [`load_trials`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputFormat {
    /// One CSV file, rows `label, v1, ..., vL`.
    CsvRows,
    /// One CSV file per class; filename stem is the label, rows are
    /// samples only.
    LabeledDir,
}

/// Loads a trial set from disk. Ids are assigned 0..n-1 in row order
/// (for `labeled-dir`: files visited in ascending label order).
pub fn load_trials<T: Scalar>(
    path: &Path,
    format: InputFormat,
    channel: Option<ChannelSpec>,
) -> Result<TrialSet<T>> {
    if let Some(spec) = &channel {
        spec.validate()?;
    }
    match format {
        InputFormat::CsvRows => {
            let mut file = fs::File::open(path)?;
            let mut text = String::new();
            file.read_to_string(&mut text)?;
            let trials = parse_csv_rows(&text, channel)?;
            if trials.is_empty() {
                return Err(Error::EmptyInput(format!("{} has no data rows", path.display())));
            }
            TrialSet::new(trials)
        }
        InputFormat::LabeledDir => {
            let mut files: Vec<(u32, std::path::PathBuf)> = Vec::new();
            for entry in fs::read_dir(path)? {
                let entry = entry?;
                let p = entry.path();
                if !p.is_file() {
                    continue;
                }
                let stem = match p.file_stem().and_then(|s| s.to_str()) {
                    Some(s) => s,
                    None => continue,
                };
                match stem.parse::<u32>() {
                    Ok(label) => files.push((label, p)),
                    Err(_) => continue, // not a class file
                }
            }
            files.sort();
            if files.is_empty() {
                return Err(Error::EmptyInput(format!(
                    "{} contains no files named <label>.csv",
                    path.display()
                )));
            }
            let mut trials = Vec::new();
            let mut next_id = 0u64;
            for (label, file_path) in files {
                let text = fs::read_to_string(&file_path)?;
                let rows = parse_sample_rows::<T>(&text, channel)?;
                for samples in rows {
                    trials.push(Trial::new(next_id, label, samples)?);
                    next_id += 1;
                }
            }
            if trials.is_empty() {
                return Err(Error::EmptyInput(format!(
                    "{} contains class files but no data rows",
                    path.display()
                )));
            }
            TrialSet::new(trials)
        }
    }
}

/// Parses `label, v1, ..., vL` rows; error positions are 1-based physical
/// row/cell numbers.
fn parse_csv_rows<T: Scalar>(text: &str, channel: Option<ChannelSpec>) -> Result<Vec<Trial<T>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let mut trials = Vec::new();
    let mut next_id = 0u64;
    for (idx, record) in reader.records().enumerate() {
        let row = idx + 1;
        let record = record.map_err(|e| Error::Parse {
            row,
            column: 1,
            message: e.to_string(),
        })?;
        if record.iter().all(|c| c.is_empty()) {
            continue;
        }
        // Header auto-detection: a non-numeric first cell on the first row.
        if idx == 0 {
            let first = record.get(0).unwrap_or("");
            if first.parse::<f64>().is_err() {
                continue;
            }
        }
        let cell = record.get(0).ok_or(Error::Parse {
            row,
            column: 1,
            message: "missing label cell".into(),
        })?;
        let label = parse_label(cell, row, 1)?;
        let mut samples = Vec::with_capacity(record.len().saturating_sub(1));
        for (ci, cell) in record.iter().enumerate().skip(1) {
            let v = parse_sample::<T>(cell, row, ci + 1)?;
            samples.push(v);
        }
        if samples.len() < 2 {
            return Err(Error::Parse {
                row,
                column: 2,
                message: format!("row has {} sample(s); at least 2 required", samples.len()),
            });
        }
        let samples = apply_channel(samples, channel, row)?;
        trials.push(Trial::new(next_id, label, samples)?);
        next_id += 1;
    }
    Ok(trials)
}

/// Parses sample-only rows (`labeled-dir` class files).
fn parse_sample_rows<T: Scalar>(
    text: &str,
    channel: Option<ChannelSpec>,
) -> Result<Vec<Vec<T>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let row = idx + 1;
        let record = record.map_err(|e| Error::Parse {
            row,
            column: 1,
            message: e.to_string(),
        })?;
        if record.iter().all(|c| c.is_empty()) {
            continue;
        }
        if idx == 0 {
            let first = record.get(0).unwrap_or("");
            if first.parse::<f64>().is_err() {
                continue; // header
            }
        }
        let mut samples = Vec::with_capacity(record.len());
        for (ci, cell) in record.iter().enumerate() {
            samples.push(parse_sample::<T>(cell, row, ci + 1)?);
        }
        if samples.len() < 2 {
            return Err(Error::Parse {
                row,
                column: 1,
                message: format!("row has {} sample(s); at least 2 required", samples.len()),
            });
        }
        rows.push(apply_channel(samples, channel, row)?);
    }
    Ok(rows)
}

fn parse_label(cell: &str, row: usize, column: usize) -> Result<u32> {
    let v: f64 = cell.parse().map_err(|_| Error::Parse {
        row,
        column,
        message: format!("expected a class label, found {cell:?}"),
    })?;
    if v < 0.0 || v.fract() != 0.0 || v > u32::MAX as f64 {
        return Err(Error::Parse {
            row,
            column,
            message: format!("label must be a small non-negative integer, found {cell:?}"),
        });
    }
    Ok(v as u32)
}

fn parse_sample<T: Scalar>(cell: &str, row: usize, column: usize) -> Result<T> {
    let v: T = cell.parse::<T>().map_err(|_| Error::Parse {
        row,
        column,
        message: format!("expected a number, found {cell:?}"),
    })?;
    if !v.is_finite() {
        return Err(Error::Validation(format!(
            "non-finite amplitude at row {row}, column {column}"
        )));
    }
    Ok(v)
}

fn apply_channel<T: Scalar>(
    samples: Vec<T>,
    channel: Option<ChannelSpec>,
    row: usize,
) -> Result<Vec<T>> {
    let spec = match channel {
        None => return Ok(samples),
        Some(s) if s.channels == 1 => return Ok(samples),
        Some(s) => s,
    };
    if !samples.len().is_multiple_of(spec.channels) {
        return Err(Error::Parse {
            row,
            column: 1,
            message: format!(
                "row length {} not divisible by {} channels",
                samples.len(),
                spec.channels
            ),
        });
    }
    let per = samples.len() / spec.channels;
    let start = spec.channel * per;
    Ok(samples[start..start + per].to_vec())
}

/// Serializes a trial set to the CSV interchange format
/// (`label, v1, ..., vL` per row, no header). Loading the output back
/// reproduces the labels and samples exactly.
pub fn trials_to_csv<T: Scalar>(set: &TrialSet<T>) -> String {
    let mut out = String::new();
    for t in set.trials() {
        out.push_str(&t.label.to_string());
        for v in &t.samples {
            out.push(',');
            out.push_str(&format!("{v}"));
        }
        out.push('\n');
    }
    out
}

/// Parses the CSV interchange format from a string (path-free variant of
/// [`load_trials`] for `csv-rows`).
pub fn trials_from_csv<T: Scalar>(text: &str) -> Result<TrialSet<T>> {
    let trials = parse_csv_rows(text, None)?;
    if trials.is_empty() {
        return Err(Error::EmptyInput("no data rows".into()));
    }
    TrialSet::new(trials)
}

// ---------------------------------------------------------------------------
// Synthesis
// ---------------------------------------------------------------------------

/// Configuration for the synthetic generator.
///
/// Each class gets a distinct smooth prototype (a two-sinusoid mix with
/// class-specific frequencies and phases). Clean trials jitter the
/// prototype per trial: an amplitude scale, a harmonic-ratio factor, a
/// small time shift, and additive sample noise. Classes alternate between
/// a tight and a loose internal spread. A `noise_fraction` of each class's
/// trials is replaced by unstructured trials — two-harmonic curves with
/// random frequencies from the band the classes occupy and a random global
/// time shift — carrying the class label ("invalid" trials). Deterministic
/// for a fixed seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub classes: usize,
    pub per_class: usize,
    pub length: usize,
    pub noise_fraction: f64,
    pub seed: u64,
}

impl SynthConfig {
    fn validate(&self) -> Result<()> {
        if self.classes < 2 {
            return Err(Error::Config("synth: classes must be >= 2".into()));
        }
        if self.per_class < 2 {
            return Err(Error::Config("synth: per_class must be >= 2".into()));
        }
        if self.length < 8 {
            return Err(Error::Config("synth: length must be >= 8".into()));
        }
        if !(0.0..1.0).contains(&self.noise_fraction) {
            return Err(Error::Config("synth: noise_fraction must be in [0, 1)".into()));
        }
        Ok(())
    }

    /// Noise trials per class (nearest integer, capped below per_class).
    pub fn noise_per_class(&self) -> usize {
        let n = (self.noise_fraction * self.per_class as f64).round() as usize;
        n.min(self.per_class.saturating_sub(1))
    }
}

/// Two-harmonic curve over `length` points: `sin(f1) + ratio * sin(f2)`
/// with unit-range time, scaled by `scale`.
fn two_harmonic(
    length: usize,
    scale: f64,
    f1: f64,
    phi1: f64,
    ratio: f64,
    f2: f64,
    phi2: f64,
) -> Vec<f64> {
    let tau = std::f64::consts::TAU;
    (0..length)
        .map(|t| {
            let u = t as f64 / (length - 1) as f64;
            scale * ((tau * (f1 * u + phi1)).sin() + ratio * (tau * (f2 * u + phi2)).sin())
        })
        .collect()
}

/// Class prototype frequencies and phases. Classes share the band that
/// the unstructured generator also draws from.
fn class_shape(class: usize) -> (f64, f64, f64, f64) {
    let c = class as f64;
    let f1 = 1.05 + 0.3 * c;
    let f2 = 2.1 + 0.6 * c;
    let phi1 = 0.1 * c;
    let phi2 = 0.17 + 0.125 * c;
    (f1, phi1, f2, phi2)
}

/// Builds a synthetic trial set per [`SynthConfig`]. Trials are ordered
/// class-major with sequential ids; within a class the last
/// `noise_per_class` trials are the unstructured ones (marked in
/// [`TrialSet::noise_ids`]).
pub fn synth_trials<T: Scalar>(config: &SynthConfig) -> Result<TrialSet<T>> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let scale = Uniform::new_inclusive(0.8, 1.2);
    let band_low = Uniform::new(1.0, 1.4);
    let band_high = Uniform::new(2.05, 2.75);
    let phase = Uniform::new(0.0, 1.0);

    let noise_count = config.noise_per_class();
    let mut trials = Vec::with_capacity(config.classes * config.per_class);
    let mut noise_ids = BTreeSet::new();
    let mut id = 0u64;
    for class in 0..config.classes {
        let (f1, phi1, f2, phi2) = class_shape(class);
        // classes alternate between tight and loose internal spread
        let (jitter_sd, ratio_lo, ratio_hi, pj) = if class % 2 == 0 {
            (0.07, 0.75, 1.25, 0.03)
        } else {
            (0.17, 0.4, 1.6, 0.05)
        };
        let jitter = Normal::new(0.0, jitter_sd).expect("valid std dev");
        let ratio_spread = Uniform::new_inclusive(ratio_lo, ratio_hi);
        let phase_jitter = Uniform::new_inclusive(-pj, pj);
        for k in 0..config.per_class {
            let is_noise = k >= config.per_class - noise_count;
            let samples: Vec<f64> = if is_noise {
                // unstructured: frequencies from the shared band, one
                // random global time shift, no class structure
                let base = phase.sample(&mut rng);
                let offset = 0.1 + 0.2 * phase.sample(&mut rng);
                two_harmonic(
                    config.length,
                    scale.sample(&mut rng),
                    band_low.sample(&mut rng),
                    base,
                    0.6,
                    band_high.sample(&mut rng),
                    base + offset,
                )
            } else {
                let s = scale.sample(&mut rng);
                let w = ratio_spread.sample(&mut rng);
                let th = phase_jitter.sample(&mut rng);
                let mut x =
                    two_harmonic(config.length, s, f1, phi1 + th, 0.6 * w, f2, phi2 + th);
                for v in &mut x {
                    *v += jitter.sample(&mut rng);
                }
                x
            };
            if is_noise {
                noise_ids.insert(id);
            }
            let samples = samples.into_iter().map(T::from_f).collect();
            trials.push(Trial::new(id, class as u32, samples)?);
            id += 1;
        }
    }
    TrialSet::with_noise_ids(trials, noise_ids)
}

// ---------------------------------------------------------------------------
// Hold-out splitting
// ---------------------------------------------------------------------------

/// One stratified train/test split.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub seed: u64,
    pub repetition: usize,
    pub train: Vec<u64>,
    pub test: Vec<u64>,
}

impl SplitPlan {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("split plan serializes")
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for repetition `rep` derived from the base seed.
pub fn derive_seed(base: u64, rep: usize) -> u64 {
    splitmix64(base ^ splitmix64(rep as u64 + 1))
}

/// Stratified hold-out: `repetitions` independent plans at
/// `ratio.0 : ratio.1` train:test, rounded to the nearest trial per class
/// (at least one trial on each side).
pub fn holdout_split<T: Scalar>(
    set: &TrialSet<T>,
    ratio: (u32, u32),
    repetitions: usize,
    seed: u64,
) -> Result<Vec<SplitPlan>> {
    if ratio.0 == 0 || ratio.1 == 0 {
        return Err(Error::Config("split ratio parts must be positive".into()));
    }
    if repetitions == 0 {
        return Err(Error::Config("repetitions must be positive".into()));
    }
    let by_class = set.ids_by_class();
    for (&label, ids) in &by_class {
        if ids.len() < 3 {
            return Err(Error::Stratification {
                label,
                count: ids.len(),
                needed: 3,
            });
        }
    }

    let (a, b) = (ratio.0 as usize, ratio.1 as usize);
    let mut plans = Vec::with_capacity(repetitions);
    for rep in 0..repetitions {
        let rep_seed = derive_seed(seed, rep);
        let mut rng = ChaCha8Rng::seed_from_u64(rep_seed);
        let mut train = Vec::new();
        let mut test = Vec::new();
        for ids in by_class.values() {
            let mut pool = ids.clone();
            pool.shuffle(&mut rng);
            let n = pool.len();
            // round(n * a / (a + b)), clamped so both sides are non-empty
            let take = (2 * a * n + (a + b)) / (2 * (a + b));
            let take = take.clamp(1, n - 1);
            train.extend_from_slice(&pool[..take]);
            test.extend_from_slice(&pool[take..]);
        }
        train.sort_unstable();
        test.sort_unstable();
        plans.push(SplitPlan {
            seed: rep_seed,
            repetition: rep,
            train,
            test,
        });
    }
    Ok(plans)
}
