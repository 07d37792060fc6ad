//! The labeled, vertex- and edge-weighted trial graph and its threshold
//! views.
//!
//! Vertices are trials, edge weights are the blended similarities, and a
//! vertex's weight is its mean similarity to every other vertex. Vertex
//! weights are computed once on the full graph and held fixed; pruning
//! and round-by-round vertex removal operate through immutable
//! [`GraphView`]s over the parent graph.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ingest::TrialSet;
use crate::scalar::Scalar;
use crate::similarity::SimilarityMatrix;

/// Per-vertex weights: mean of each matrix row excluding the diagonal.
/// A single-vertex matrix yields `[0]`.
pub fn vertex_weights<T: Scalar>(mu: &SimilarityMatrix<T>) -> Vec<T> {
    let n = mu.n();
    if n == 1 {
        return vec![T::zero()];
    }
    let denom = T::from_count(n - 1);
    (0..n)
        .map(|i| {
            let mut sum = T::zero();
            for j in 0..n {
                if j != i {
                    sum = sum + mu.get(i, j);
                }
            }
            sum / denom
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph<T> {
    ids: Vec<u64>,
    labels: Vec<u32>,
    eta: Vec<T>,
    mu: SimilarityMatrix<T>,
}

#[derive(Serialize)]
struct GraphDebugJson<'a, T> {
    vertices: &'a [u64],
    labels: &'a [u32],
    eta: &'a [T],
    mu_ref: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    delta: Option<T>,
}

impl<T: Scalar> WeightedGraph<T> {
    /// Assembles the graph for a trial set and its similarity matrix.
    /// Vertex order follows trial order; the matrix ids must match.
    pub fn build(set: &TrialSet<T>, mu: SimilarityMatrix<T>) -> Result<Self> {
        if set.is_empty() {
            return Err(Error::EmptyInput("graph of an empty trial set".into()));
        }
        let ids = set.ids();
        if mu.ids() != ids.as_slice() {
            return Err(Error::IdMismatch(
                "similarity matrix ids do not match trial set ids".into(),
            ));
        }
        let labels = set.trials().iter().map(|t| t.label).collect();
        let eta = vertex_weights(&mu);
        Ok(Self {
            ids,
            labels,
            eta,
            mu,
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[u64] {
        &self.ids
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn eta(&self) -> &[T] {
        &self.eta
    }

    pub fn mu(&self) -> &SimilarityMatrix<T> {
        &self.mu
    }

    pub fn id_at(&self, idx: usize) -> u64 {
        self.ids[idx]
    }

    pub fn index_of(&self, id: u64) -> Option<usize> {
        self.ids.iter().position(|&x| x == id)
    }

    /// Distinct labels present, ascending.
    pub fn classes(&self) -> Vec<u32> {
        let mut c: Vec<u32> = self.labels.clone();
        c.sort_unstable();
        c.dedup();
        c
    }

    /// View with edges below `delta` absent. Vertex weights are not
    /// recomputed.
    pub fn view(&self, delta: T) -> Result<GraphView<'_, T>> {
        if !(delta >= T::zero() && delta <= T::one()) {
            return Err(Error::Config(format!(
                "edge threshold must be in [0, 1], got {delta}"
            )));
        }
        Ok(GraphView {
            graph: self,
            delta,
            alive: vec![true; self.len()],
        })
    }

    /// Debug JSON export: vertices, labels, vertex weights, an optional
    /// reference to the matrix file, and the view threshold if any.
    pub fn debug_json(&self, mu_ref: Option<&str>) -> String
    where
        T: Serialize,
    {
        serde_json::to_string(&GraphDebugJson {
            vertices: &self.ids,
            labels: &self.labels,
            eta: &self.eta,
            mu_ref,
            delta: None,
        })
        .expect("graph debug info serializes")
    }
}

/// Threshold pruning as a standalone operation.
pub fn prune_edges<T: Scalar>(g: &WeightedGraph<T>, delta: T) -> Result<GraphView<'_, T>> {
    g.view(delta)
}

/// Read-only restriction of a graph: a similarity threshold plus a set of
/// surviving vertices. Cheap to clone and to narrow further.
#[derive(Debug, Clone)]
pub struct GraphView<'g, T> {
    graph: &'g WeightedGraph<T>,
    delta: T,
    alive: Vec<bool>,
}

impl<'g, T: Scalar> GraphView<'g, T> {
    pub fn graph(&self) -> &'g WeightedGraph<T> {
        self.graph
    }

    pub fn delta(&self) -> T {
        self.delta
    }

    pub fn is_alive(&self, idx: usize) -> bool {
        self.alive[idx]
    }

    /// Indices of surviving vertices, ascending.
    pub fn alive_indices(&self) -> Vec<usize> {
        (0..self.alive.len()).filter(|&i| self.alive[i]).collect()
    }

    /// Edge present: both endpoints alive, distinct, and similarity at or
    /// above the threshold.
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i != j && self.alive[i] && self.alive[j] && self.graph.mu.get(i, j) >= self.delta
    }

    /// Same threshold, with the given vertex ids removed.
    pub fn excluding(&self, ids: &[u64]) -> Result<Self> {
        let mut alive = self.alive.clone();
        for &id in ids {
            let idx = self
                .graph
                .index_of(id)
                .ok_or_else(|| Error::IdMismatch(format!("id {id} not in graph")))?;
            alive[idx] = false;
        }
        Ok(Self {
            graph: self.graph,
            delta: self.delta,
            alive,
        })
    }

    /// Same surviving vertices under a different threshold.
    pub fn with_delta(&self, delta: T) -> Result<Self> {
        if !(delta >= T::zero() && delta <= T::one()) {
            return Err(Error::Config(format!(
                "edge threshold must be in [0, 1], got {delta}"
            )));
        }
        Ok(Self {
            graph: self.graph,
            delta,
            alive: self.alive.clone(),
        })
    }

    /// Surviving edges as index pairs `(i, j)`, `i < j`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.alive.len();
        let mut out = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if self.has_edge(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }
}
