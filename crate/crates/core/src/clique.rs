//! Greedy per-class maximum-weight clique selection.
//!
//! A clique here is a same-label vertex set in which every pair's
//! similarity meets the class threshold. Its weight is the sum of member
//! vertex weights plus the sum of internal edge weights; equivalently,
//! the sum over internal edges of [`pair_weight`], which folds both
//! vertex weights into the edge term. Growth is greedy: seed with the
//! highest-scoring vertex of the class, then repeatedly admit the
//! highest-scoring candidate adjacent (at the threshold) to every current
//! member. Each admission raises the clique weight by exactly the
//! candidate's vertex weight plus its similarities to the members, so the
//! weight increases strictly along the way.
//!
//! Multi-class selection runs one growth round per class on a graph view
//! that drops each round's members, so the produced cliques are disjoint.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{GraphView, WeightedGraph};
use crate::scalar::Scalar;

/// One selected clique: a same-label vertex set valid under `delta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clique<T> {
    pub label: u32,
    pub delta: T,
    /// Member trial ids, ascending.
    pub members: Vec<u64>,
    /// Total weight: sum of member vertex weights plus internal edge
    /// weights.
    pub weight: T,
}

/// Parameters echoed into selection output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct SelectionParams<T> {
    pub deltas: Vec<T>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<T>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
}

/// Result of a selection pass: per-class cliques (empty for the flat
/// baseline selectors), the selected ids, and the rejected remainder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult<T> {
    pub method: String,
    pub params: SelectionParams<T>,
    pub cliques: Vec<Clique<T>>,
    pub selected: Vec<u64>,
    pub rejected: Vec<u64>,
}

impl<T: Scalar + Serialize> SelectionResult<T> {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("selection result serializes")
    }
}

impl<T: Scalar> SelectionResult<T> {
    /// Flat selection (no cliques) from a sorted id list, with the
    /// complement of `all_ids` as the rejected set.
    pub fn flat(
        method: &str,
        params: SelectionParams<T>,
        selected: Vec<u64>,
        all_ids: &[u64],
    ) -> Self {
        let rejected = all_ids
            .iter()
            .filter(|id| !selected.contains(id))
            .copied()
            .collect();
        Self {
            method: method.to_string(),
            params,
            cliques: Vec::new(),
            selected,
            rejected,
        }
    }
}

/// Edge weight folding both endpoint vertex weights into the edge term:
/// `(eta_i + eta_j) / (clique_size - 1) + mu_ij` when the similarity meets
/// `delta`, else 0. Summed over a clique's edges this reproduces the
/// clique weight exactly.
pub fn pair_weight<T: Scalar>(
    g: &WeightedGraph<T>,
    i: u64,
    j: u64,
    clique_size: usize,
    delta: T,
) -> Result<T> {
    if i == j {
        return Err(Error::Validation(format!(
            "pair weight of a vertex with itself (id {i})"
        )));
    }
    if clique_size < 2 {
        return Err(Error::Validation(format!(
            "pair weight needs a clique of at least 2 vertices, got {clique_size}"
        )));
    }
    let ii = g
        .index_of(i)
        .ok_or_else(|| Error::IdMismatch(format!("id {i} not in graph")))?;
    let jj = g
        .index_of(j)
        .ok_or_else(|| Error::IdMismatch(format!("id {j} not in graph")))?;
    let mu = g.mu().get(ii, jj);
    if mu < delta {
        return Ok(T::zero());
    }
    let eta = g.eta();
    Ok((eta[ii] + eta[jj]) / T::from_count(clique_size - 1) + mu)
}

/// Admission test for a candidate against the current members: admissible
/// iff its similarity to every member is at or above the view's
/// threshold. Returns the exact weight gain on admission (`eta_v` plus
/// the sum of similarities to members), or `None` when inadmissible.
pub fn admission_check<T: Scalar>(
    view: &GraphView<'_, T>,
    members: &[u64],
    candidate: u64,
) -> Result<Option<T>> {
    let g = view.graph();
    let v = g
        .index_of(candidate)
        .ok_or_else(|| Error::IdMismatch(format!("id {candidate} not in graph")))?;
    if members.contains(&candidate) {
        return Err(Error::Validation(format!(
            "candidate {candidate} is already a member"
        )));
    }
    if let Some(&first) = members.first() {
        let fi = g
            .index_of(first)
            .ok_or_else(|| Error::IdMismatch(format!("id {first} not in graph")))?;
        if g.labels()[fi] != g.labels()[v] {
            return Err(Error::Validation(format!(
                "candidate {candidate} has label {}, clique has label {}",
                g.labels()[v],
                g.labels()[fi]
            )));
        }
    }
    let mut gain = g.eta()[v];
    for &m in members {
        let mi = g
            .index_of(m)
            .ok_or_else(|| Error::IdMismatch(format!("id {m} not in graph")))?;
        if g.mu().get(mi, v) < view.delta() {
            return Ok(None);
        }
        gain = gain + g.mu().get(mi, v);
    }
    Ok(Some(gain))
}

/// One admission step of a traced growth.
#[derive(Debug, Clone, PartialEq)]
pub struct Admission<T> {
    pub vertex: u64,
    pub weight_before: T,
    pub gain: T,
}

/// Per-vertex selection score on a view: vertex weight times the sum of
/// its similarities to the other same-label surviving vertices that meet
/// the threshold.
fn vertex_score<T: Scalar>(view: &GraphView<'_, T>, v: usize, candidates: &[usize]) -> T {
    let g = view.graph();
    let mut row = T::zero();
    for &u in candidates {
        if u != v && g.mu().get(v, u) >= view.delta() {
            row = row + g.mu().get(v, u);
        }
    }
    g.eta()[v] * row
}

/// Grows the greedy maximum-weight clique for `label` on the view and
/// reports every admission. Ties on the score break toward the lowest
/// trial id, so growth is deterministic.
pub fn grow_clique_traced<T: Scalar>(
    view: &GraphView<'_, T>,
    label: u32,
) -> Result<(Clique<T>, Vec<Admission<T>>)> {
    let g = view.graph();
    let candidates: Vec<usize> = view
        .alive_indices()
        .into_iter()
        .filter(|&i| g.labels()[i] == label)
        .collect();
    if candidates.is_empty() {
        return Err(Error::EmptyClass { label, round: 0 });
    }

    // Static score ranking over the view's candidate pool.
    let mut ranked: Vec<(usize, T)> = candidates
        .iter()
        .map(|&v| (v, vertex_score(view, v, &candidates)))
        .collect();
    ranked.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .expect("scores are finite")
            .then_with(|| g.id_at(a.0).cmp(&g.id_at(b.0)))
    });

    let seed = ranked[0].0;
    let mut member_idx = vec![seed];
    let mut members = vec![g.id_at(seed)];
    let mut weight = g.eta()[seed];
    let mut remaining: Vec<usize> = ranked[1..].iter().map(|&(v, _)| v).collect();
    let mut trace = Vec::new();

    loop {
        let mut admitted = None;
        'scan: for (pos, &v) in remaining.iter().enumerate() {
            let mut gain = g.eta()[v];
            for &m in &member_idx {
                if g.mu().get(m, v) < view.delta() {
                    continue 'scan;
                }
                gain = gain + g.mu().get(m, v);
            }
            admitted = Some((pos, v, gain));
            break;
        }
        match admitted {
            None => break,
            Some((pos, v, gain)) => {
                if gain <= T::zero() {
                    return Err(Error::Internal(format!(
                        "admission of vertex {} would not increase the clique weight (gain {gain})",
                        g.id_at(v)
                    )));
                }
                trace.push(Admission {
                    vertex: g.id_at(v),
                    weight_before: weight,
                    gain,
                });
                weight = weight + gain;
                member_idx.push(v);
                members.push(g.id_at(v));
                remaining.remove(pos);
            }
        }
    }

    members.sort_unstable();
    Ok((
        Clique {
            label,
            delta: view.delta(),
            members,
            weight,
        },
        trace,
    ))
}

/// [`grow_clique_traced`] without the trace.
pub fn grow_clique<T: Scalar>(view: &GraphView<'_, T>, label: u32) -> Result<Clique<T>> {
    grow_clique_traced(view, label).map(|(c, _)| c)
}

/// Class processing order: descending class size, ties toward the smaller
/// label.
pub fn class_order_by_size<T: Scalar>(g: &WeightedGraph<T>) -> Vec<u32> {
    let mut counts: Vec<(u32, usize)> = g
        .classes()
        .into_iter()
        .map(|c| (c, g.labels().iter().filter(|&&l| l == c).count()))
        .collect();
    counts.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    counts.into_iter().map(|(c, _)| c).collect()
}

/// Multi-class selection: one threshold and one growth round per class,
/// each round running on the graph with earlier rounds' members removed.
///
/// `deltas` must be strictly descending in `[0, 1)` and align with
/// `class_order` one-to-one.
pub fn mwc_select<T: Scalar>(
    g: &WeightedGraph<T>,
    deltas: &[T],
    class_order: &[u32],
) -> Result<SelectionResult<T>> {
    if deltas.len() != class_order.len() {
        return Err(Error::Config(format!(
            "{} thresholds for {} classes; one threshold per class required",
            deltas.len(),
            class_order.len()
        )));
    }
    if deltas.is_empty() {
        return Err(Error::Config("no classes to select".into()));
    }
    let mut seen = std::collections::BTreeSet::new();
    for &c in class_order {
        if !seen.insert(c) {
            return Err(Error::Config(format!("class {c} listed twice")));
        }
    }
    let mut prev = T::one();
    for &d in deltas {
        if !(d >= T::zero() && d < prev) {
            return Err(Error::Config(format!(
                "thresholds must be strictly descending within [0, 1), got {d} after {prev}"
            )));
        }
        prev = d;
    }

    let mut cliques = Vec::with_capacity(class_order.len());
    let mut removed: Vec<u64> = Vec::new();
    for (round, (&label, &delta)) in class_order.iter().zip(deltas).enumerate() {
        let view = g.view(delta)?.excluding(&removed)?;
        let clique = grow_clique(&view, label).map_err(|e| match e {
            Error::EmptyClass { label, .. } => Error::EmptyClass {
                label,
                round: round + 1,
            },
            other => other,
        })?;
        removed.extend_from_slice(&clique.members);
        cliques.push(clique);
    }

    let mut selected: Vec<u64> = cliques.iter().flat_map(|c| c.members.clone()).collect();
    selected.sort_unstable();
    let rejected: Vec<u64> = g
        .ids()
        .iter()
        .filter(|id| !selected.contains(id))
        .copied()
        .collect();
    Ok(SelectionResult {
        method: "mwc".to_string(),
        params: SelectionParams {
            deltas: deltas.to_vec(),
            ..SelectionParams::default()
        },
        cliques,
        selected,
        rejected,
    })
}
