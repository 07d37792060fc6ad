//! Discrete Fréchet distance, local-trend correlation, and the blended
//! similarity matrix.
//!
//! The pairwise score combines two views of curve closeness:
//!
//! * a global one — the discrete Fréchet distance, min-max normalized
//!   over the data set's pairs, inverted so 1 means closest;
//! * a local one — the correlation of lag-`q` difference sequences,
//!   mapped from `[-1, 1]` onto `[0, 1]`.
//!
//! `s = lambda * (1 - norm(frechet)) + (1 - lambda) * (1 + trend) / 2`,
//! clamped to `[0, 1]`. Larger is more similar throughout the crate.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::TrialSet;
use crate::scalar::Scalar;

/// Parameters of the blended similarity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimilarityParams<T> {
    /// Weight of the global (Fréchet) term, in `[0, 1]`.
    pub lambda: T,
    /// Segment lag of the local-trend differences, `>= 1`.
    pub q: usize,
    pub normalization: Normalization,
}

/// How raw Fréchet distances are mapped onto `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// Min-max over the data set's unordered off-diagonal pairs.
    MinMaxOverSet,
}

impl<T: Scalar> Default for SimilarityParams<T> {
    fn default() -> Self {
        Self {
            lambda: T::from_f(0.5),
            q: 1,
            normalization: Normalization::MinMaxOverSet,
        }
    }
}

impl<T: Scalar> SimilarityParams<T> {
    pub fn new(lambda: T, q: usize) -> Self {
        Self {
            lambda,
            q,
            normalization: Normalization::MinMaxOverSet,
        }
    }

    /// Checks bounds against the shortest trial of the set.
    pub fn validate(&self, min_trial_len: usize) -> Result<()> {
        if !(self.lambda >= T::zero() && self.lambda <= T::one()) {
            return Err(Error::Config(format!(
                "lambda must be in [0, 1], got {}",
                self.lambda
            )));
        }
        if self.q == 0 {
            return Err(Error::Config("segment lag q must be >= 1".into()));
        }
        if self.q >= min_trial_len {
            return Err(Error::Config(format!(
                "segment lag q = {} must be smaller than the shortest trial length {}",
                self.q, min_trial_len
            )));
        }
        Ok(())
    }
}

/// Discrete Fréchet distance between two 1-D sample sequences under the
/// absolute-difference point norm: minimum over monotone couplings of the
/// maximum pointwise difference.
pub fn discrete_frechet<T: Scalar>(a: &[T], b: &[T]) -> Result<T> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Validation(
            "discrete Fréchet distance needs non-empty sequences".into(),
        ));
    }
    let dist = |i: usize, j: usize| (a[i] - b[j]).abs();
    // Rolling two-row dynamic program over the coupling lattice.
    let n = b.len();
    let mut prev = vec![T::zero(); n];
    let mut cur = vec![T::zero(); n];
    prev[0] = dist(0, 0);
    for j in 1..n {
        prev[j] = prev[j - 1].max(dist(0, j));
    }
    for i in 1..a.len() {
        cur[0] = prev[0].max(dist(i, 0));
        for j in 1..n {
            let reach = prev[j].min(prev[j - 1]).min(cur[j - 1]);
            cur[j] = reach.max(dist(i, j));
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev[n - 1])
}

/// Outcome of the local-trend correlation. `Undefined` marks a constant
/// input (a difference sequence that is identically zero), which carries
/// no trend information; its neutral numeric value is 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LocalTrend<T> {
    Defined(T),
    Undefined,
}

impl<T: Scalar> LocalTrend<T> {
    /// Numeric value with `Undefined` mapped to the neutral trend 0.
    pub fn value(self) -> T {
        match self {
            LocalTrend::Defined(v) => v,
            LocalTrend::Undefined => T::zero(),
        }
    }

    pub fn is_undefined(self) -> bool {
        matches!(self, LocalTrend::Undefined)
    }
}

/// Down-samples `s` to `p` points by uniform index selection (keeps both
/// endpoints). Identity when `s.len() == p`.
fn downsample<T: Copy>(s: &[T], p: usize) -> Vec<T> {
    let len = s.len();
    debug_assert!(p >= 2 && p <= len);
    if len == p {
        return s.to_vec();
    }
    (0..p)
        .map(|t| {
            let idx = (2 * t * (len - 1) + (p - 1)) / (2 * (p - 1));
            s[idx]
        })
        .collect()
}

/// Correlation of the lag-`q` difference sequences of `a` and `b`; the
/// longer sequence is first down-sampled to the shorter length.
/// Symmetric, in `[-1, 1]`, and `Undefined` when either trial is constant.
pub fn local_trend<T: Scalar>(a: &[T], b: &[T], q: usize) -> Result<LocalTrend<T>> {
    let p = a.len().min(b.len());
    if q == 0 || q >= p {
        return Err(Error::Config(format!(
            "segment lag q = {q} must satisfy 1 <= q < min length {p}"
        )));
    }
    let da = diffs(&downsample(a, p), q);
    let db = diffs(&downsample(b, p), q);
    let mut num = T::zero();
    let mut aa = T::zero();
    let mut bb = T::zero();
    for (&x, &y) in da.iter().zip(&db) {
        num = num + x * y;
        aa = aa + x * x;
        bb = bb + y * y;
    }
    if aa == T::zero() || bb == T::zero() {
        return Ok(LocalTrend::Undefined);
    }
    let r = num / (aa * bb).sqrt();
    Ok(LocalTrend::Defined(r.min(T::one()).max(-T::one())))
}

fn diffs<T: Scalar>(s: &[T], q: usize) -> Vec<T> {
    (0..s.len() - q).map(|t| s[t + q] - s[t]).collect()
}

/// Min-max normalization context for Fréchet distances, taken over a data
/// set's unordered off-diagonal pairs. When every pairwise distance is
/// equal (or there are no pairs), the normalized value is 0 for all pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrechetNorm<T> {
    pub min: T,
    pub max: T,
}

impl<T: Scalar> FrechetNorm<T> {
    pub fn from_distances<I: IntoIterator<Item = T>>(distances: I) -> Self {
        let mut min = T::infinity();
        let mut max = T::neg_infinity();
        for d in distances {
            min = min.min(d);
            max = max.max(d);
        }
        if !(min.is_finite() && max.is_finite()) {
            // no pairs: degenerate context
            return Self {
                min: T::zero(),
                max: T::zero(),
            };
        }
        Self { min, max }
    }

    pub fn apply(&self, d: T) -> T {
        if self.max > self.min {
            ((d - self.min) / (self.max - self.min))
                .min(T::one())
                .max(T::zero())
        } else {
            T::zero()
        }
    }
}

fn blend<T: Scalar>(norm_frechet: T, trend: T, lambda: T) -> T {
    let half = T::from_f(0.5);
    let s = lambda * (T::one() - norm_frechet) + (T::one() - lambda) * (T::one() + trend) * half;
    s.min(T::one()).max(T::zero())
}

/// Blended similarity of two sequences given a normalization context.
pub fn blended_similarity<T: Scalar>(
    a: &[T],
    b: &[T],
    params: &SimilarityParams<T>,
    norm: &FrechetNorm<T>,
) -> Result<T> {
    let min_len = a.len().min(b.len());
    params.validate(min_len)?;
    let d = discrete_frechet(a, b)?;
    let trend = local_trend(a, b, params.q)?.value();
    Ok(blend(norm.apply(d), trend, params.lambda))
}

/// Symmetric matrix of blended similarities with unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix<T> {
    ids: Vec<u64>,
    values: Vec<T>, // row-major n x n
}

#[derive(Serialize, Deserialize)]
struct MatrixJson<T> {
    ids: Vec<u64>,
    values: Vec<Vec<T>>,
}

impl<T: Scalar> SimilarityMatrix<T> {
    /// Builds a matrix from rows, validating squareness, exact symmetry,
    /// unit diagonal and the `[0, 1]` range.
    pub fn from_rows(ids: Vec<u64>, rows: Vec<Vec<T>>) -> Result<Self> {
        let n = ids.len();
        if rows.len() != n {
            return Err(Error::Validation(format!(
                "matrix has {} rows for {} ids",
                rows.len(),
                n
            )));
        }
        let mut values = Vec::with_capacity(n * n);
        for row in &rows {
            if row.len() != n {
                return Err(Error::Validation("matrix is not square".into()));
            }
            values.extend_from_slice(row);
        }
        let m = Self { ids, values };
        m.validate()?;
        Ok(m)
    }

    fn validate(&self) -> Result<()> {
        let n = self.n();
        let mut seen = std::collections::BTreeSet::new();
        for &id in &self.ids {
            if !seen.insert(id) {
                return Err(Error::Validation(format!("duplicate matrix id {id}")));
            }
        }
        for i in 0..n {
            if self.get(i, i) != T::one() {
                return Err(Error::Validation(format!(
                    "diagonal entry {i} is {}, expected 1",
                    self.get(i, i)
                )));
            }
            for j in 0..i {
                let v = self.get(i, j);
                if v != self.get(j, i) {
                    return Err(Error::Validation(format!(
                        "matrix not symmetric at ({i}, {j})"
                    )));
                }
                if !(v >= T::zero() && v <= T::one()) {
                    return Err(Error::Validation(format!(
                        "similarity at ({i}, {j}) is {v}, outside [0, 1]"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.ids.len()
    }

    pub fn ids(&self) -> &[u64] {
        &self.ids
    }

    /// Value by row/column index.
    pub fn get(&self, i: usize, j: usize) -> T {
        self.values[i * self.n() + j]
    }

    pub fn index_of(&self, id: u64) -> Option<usize> {
        self.ids.iter().position(|&x| x == id)
    }

    /// Value by trial ids.
    pub fn get_by_id(&self, a: u64, b: u64) -> Result<T> {
        let i = self
            .index_of(a)
            .ok_or_else(|| Error::IdMismatch(format!("id {a} not in matrix")))?;
        let j = self
            .index_of(b)
            .ok_or_else(|| Error::IdMismatch(format!("id {b} not in matrix")))?;
        Ok(self.get(i, j))
    }

    /// Sub-matrix restricted to `ids`, in the given order. Values are
    /// copied unchanged (the normalization context is not recomputed).
    pub fn restrict(&self, ids: &[u64]) -> Result<Self> {
        let idx: Vec<usize> = ids
            .iter()
            .map(|&id| {
                self.index_of(id)
                    .ok_or_else(|| Error::IdMismatch(format!("id {id} not in matrix")))
            })
            .collect::<Result<_>>()?;
        let k = idx.len();
        let mut values = Vec::with_capacity(k * k);
        for &i in &idx {
            for &j in &idx {
                values.push(self.get(i, j));
            }
        }
        let m = Self {
            ids: ids.to_vec(),
            values,
        };
        m.validate()?;
        Ok(m)
    }

    /// CSV export: n rows of n comma-separated values at full (round-trip)
    /// precision.
    pub fn to_csv(&self) -> String {
        let n = self.n();
        let mut out = String::new();
        for i in 0..n {
            for j in 0..n {
                if j > 0 {
                    out.push(',');
                }
                out.push_str(&format!("{}", self.get(i, j)));
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String
    where
        T: Serialize,
    {
        let n = self.n();
        let rows: Vec<Vec<T>> = (0..n)
            .map(|i| (0..n).map(|j| self.get(i, j)).collect())
            .collect();
        serde_json::to_string(&MatrixJson {
            ids: self.ids.clone(),
            values: rows,
        })
        .expect("matrix serializes")
    }

    pub fn from_json(text: &str) -> Result<Self>
    where
        T: for<'de> Deserialize<'de>,
    {
        let raw: MatrixJson<T> = serde_json::from_str(text)
            .map_err(|e| Error::Validation(format!("matrix JSON: {e}")))?;
        Self::from_rows(raw.ids, raw.values)
    }

    /// Iterator over all values (row-major, diagonal included).
    pub fn entries(&self) -> impl Iterator<Item = T> + '_ {
        self.values.iter().copied()
    }
}

/// Computes the full blended similarity matrix of a trial set.
///
/// Every unordered pair is computed exactly once (in parallel when a rayon
/// pool is available); the result does not depend on worker count. The
/// Fréchet normalization context is taken over the full pair set before
/// blending.
pub fn similarity_matrix<T: Scalar>(
    set: &TrialSet<T>,
    params: &SimilarityParams<T>,
) -> Result<SimilarityMatrix<T>> {
    if set.is_empty() {
        return Err(Error::EmptyInput("similarity matrix of an empty set".into()));
    }
    params.validate(set.min_len())?;
    let trials = set.trials();
    let n = trials.len();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();

    let computed: Vec<(T, T)> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let a = &trials[i].samples;
            let b = &trials[j].samples;
            let d = discrete_frechet(a, b).expect("trials are non-empty");
            let trend = local_trend(a, b, params.q)
                .expect("q validated against shortest trial")
                .value();
            (d, trend)
        })
        .collect();

    let norm = FrechetNorm::from_distances(computed.iter().map(|&(d, _)| d));

    let mut values = vec![T::one(); n * n];
    for (&(i, j), &(d, trend)) in pairs.iter().zip(&computed) {
        let s = blend(norm.apply(d), trend, params.lambda);
        values[i * n + j] = s;
        values[j * n + i] = s;
    }
    Ok(SimilarityMatrix {
        ids: set.ids(),
        values,
    })
}
