//! Similarity-distribution histogram and inverse-cumulative-mass
//! threshold selection.
//!
//! The histogram counts all n² ordered matrix entries (diagonal included)
//! into bins of a fixed width, so densities sum to exactly 1. A threshold
//! for a mass target `A` is the largest bin lower edge whose top-down
//! cumulative density reaches `A`: a larger target yields a smaller
//! threshold.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::similarity::SimilarityMatrix;

/// Histogram of similarity values over `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityHistogram<T> {
    interval: T,
    counts: Vec<u64>,
    n_total: u64,
    densities: Vec<T>,
}

impl<T: Scalar> SimilarityHistogram<T> {
    pub fn interval(&self) -> T {
        self.interval
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn count(&self, bin: usize) -> u64 {
        self.counts[bin]
    }

    pub fn density(&self, bin: usize) -> T {
        self.densities[bin]
    }

    pub fn densities(&self) -> &[T] {
        &self.densities
    }

    /// Total number of counted entries (n², diagonal included).
    pub fn n_total(&self) -> u64 {
        self.n_total
    }

    pub fn lower_edge(&self, bin: usize) -> T {
        T::from_count(bin) * self.interval
    }

    pub fn upper_edge(&self, bin: usize) -> T {
        (T::from_count(bin + 1) * self.interval).min(T::one())
    }

    pub fn non_empty_bins(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }

    /// Builds a histogram directly from bin counts (test and fixture
    /// support; the same invariants apply).
    pub fn from_counts(interval: T, counts: Vec<u64>) -> Result<Self> {
        let expected = bins_for(interval)?;
        if counts.len() != expected {
            return Err(Error::Config(format!(
                "{} bins supplied, interval {interval} needs {expected}",
                counts.len()
            )));
        }
        let n_total: u64 = counts.iter().sum();
        if n_total == 0 {
            return Err(Error::EmptyInput("histogram with no entries".into()));
        }
        let denom = T::from_f(n_total as f64);
        let densities = counts
            .iter()
            .map(|&c| T::from_f(c as f64) / denom)
            .collect();
        Ok(Self {
            interval,
            counts,
            n_total,
            densities,
        })
    }

    /// CSV export: `bin_lower,bin_upper,count,density` with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_lower,bin_upper,count,density\n");
        for b in 0..self.bins() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                self.lower_edge(b),
                self.upper_edge(b),
                self.counts[b],
                self.densities[b]
            ));
        }
        out
    }
}

fn bins_for<T: Scalar>(interval: T) -> Result<usize> {
    if !(interval > T::zero() && interval <= T::one()) {
        return Err(Error::Config(format!(
            "histogram interval must be in (0, 1], got {interval}"
        )));
    }
    Ok((T::one() / interval).ceil().as_f64() as usize)
}

/// Bin index of a similarity value: the bin whose
/// `[lower, lower + interval)` range contains it, with 1.0 falling into
/// the top bin. Edge comparisons are done against the computed bin
/// edges so assignment and exported edges agree exactly.
fn bin_of<T: Scalar>(value: T, interval: T, bins: usize) -> usize {
    let mut idx = (value / interval).floor().as_f64() as usize;
    if idx >= bins {
        idx = bins - 1;
    }
    while idx + 1 < bins && value >= T::from_count(idx + 1) * interval {
        idx += 1;
    }
    while idx > 0 && value < T::from_count(idx) * interval {
        idx -= 1;
    }
    idx
}

/// Histogram of all ordered matrix entries (diagonal included).
pub fn similarity_distribution<T: Scalar>(
    mu: &SimilarityMatrix<T>,
    interval: T,
) -> Result<SimilarityHistogram<T>> {
    let bins = bins_for(interval)?;
    let mut counts = vec![0u64; bins];
    for v in mu.entries() {
        counts[bin_of(v, interval, bins)] += 1;
    }
    SimilarityHistogram::from_counts(interval, counts)
}

/// The largest bin lower edge whose top-down cumulative density reaches
/// the mass target `a` in `(0, 1)`.
pub fn select_threshold<T: Scalar>(h: &SimilarityHistogram<T>, a: T) -> Result<T> {
    if !(a > T::zero() && a < T::one()) {
        return Err(Error::Config(format!(
            "mass target must be in (0, 1), got {a}"
        )));
    }
    let mut cum = T::zero();
    for bin in (0..h.bins()).rev() {
        cum = cum + h.density(bin);
        if cum >= a {
            return Ok(h.lower_edge(bin));
        }
    }
    // Densities sum to 1 > a; reachable only through accumulated rounding.
    Ok(T::zero())
}

/// A resolved strictly-descending threshold schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaSchedule<T> {
    pub deltas: Vec<T>,
    pub warnings: Vec<String>,
}

/// One threshold per mass target. Targets must be strictly ascending
/// (larger mass, smaller threshold); when two targets land in the same
/// bin, the later threshold is stepped one bin down with a warning.
pub fn delta_schedule<T: Scalar>(
    h: &SimilarityHistogram<T>,
    targets: &[T],
) -> Result<DeltaSchedule<T>> {
    if targets.is_empty() {
        return Err(Error::Config("no mass targets given".into()));
    }
    for w in targets.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::Config(format!(
                "mass targets must be strictly ascending, got {} after {}",
                w[1], w[0]
            )));
        }
    }
    if targets.len() > h.non_empty_bins() {
        return Err(Error::Schedule(format!(
            "{} targets but only {} non-empty bins",
            targets.len(),
            h.non_empty_bins()
        )));
    }

    let mut deltas: Vec<T> = Vec::with_capacity(targets.len());
    let mut warnings = Vec::new();
    for &a in targets {
        let mut d = select_threshold(h, a)?;
        if let Some(&prev) = deltas.last() {
            if d >= prev {
                d = prev - h.interval();
                warnings.push(format!(
                    "mass target {a} collides with the previous threshold; stepped down to {d}"
                ));
                if d < T::zero() {
                    return Err(Error::Schedule(format!(
                        "cannot step below 0 for mass target {a}"
                    )));
                }
            }
        }
        deltas.push(d);
    }
    Ok(DeltaSchedule { deltas, warnings })
}
