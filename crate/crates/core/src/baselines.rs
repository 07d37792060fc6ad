//! Comparison selectors: medoid-based (per class and global) and
//! nearest-to-test (per class and label-blind).
//!
//! All four consume the same blended similarity matrix as the clique
//! selector, so no method gets a metric advantage. A "centroid" is
//! realized as the medoid — the trial maximizing mean similarity to the
//! rest of its pool — because a mean curve is not defined for
//! variable-length trials under this metric. Ties break toward the
//! lowest trial id everywhere.

use crate::error::{Error, Result};
use crate::ingest::TrialSet;
use crate::scalar::Scalar;
use crate::similarity::SimilarityMatrix;

/// Medoid of `pool`: the id maximizing mean similarity to the other pool
/// members (ties toward the lowest id). The pool must be non-empty.
fn medoid<T: Scalar>(mu: &SimilarityMatrix<T>, pool: &[u64]) -> Result<u64> {
    let mut best: Option<(T, u64)> = None;
    for &cand in pool {
        let mut sum = T::zero();
        for &other in pool {
            if other != cand {
                sum = sum + mu.get_by_id(cand, other)?;
            }
        }
        let better = match best {
            None => true,
            Some((s, id)) => sum > s || (sum == s && cand < id),
        };
        if better {
            best = Some((sum, cand));
        }
    }
    best.map(|(_, id)| id)
        .ok_or_else(|| Error::EmptyInput("medoid of an empty pool".into()))
}

/// Ids of `pool` ranked by similarity to `anchor`, descending, ties
/// toward the lowest id. The anchor ranks itself first when present
/// (self-similarity 1).
fn rank_by_similarity<T: Scalar>(
    mu: &SimilarityMatrix<T>,
    pool: &[u64],
    anchor: u64,
) -> Result<Vec<u64>> {
    let mut scored: Vec<(T, u64)> = pool
        .iter()
        .map(|&id| Ok((mu.get_by_id(id, anchor)?, id)))
        .collect::<Result<_>>()?;
    scored.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .expect("similarities are finite")
            .then_with(|| a.1.cmp(&b.1))
    });
    Ok(scored.into_iter().map(|(_, id)| id).collect())
}

/// Per-class medoid selector: in every class, the `k` trials most similar
/// to the class medoid (medoid included).
pub fn lw_select<T: Scalar>(
    train: &TrialSet<T>,
    mu: &SimilarityMatrix<T>,
    k: usize,
) -> Result<Vec<u64>> {
    if k == 0 {
        return Err(Error::Config("selection count k must be >= 1".into()));
    }
    let mut selected = Vec::new();
    for (label, ids) in train.ids_by_class() {
        if ids.len() < k {
            return Err(Error::Config(format!(
                "class {label} has {} trials, cannot select k = {k}",
                ids.len()
            )));
        }
        let center = medoid(mu, &ids)?;
        let ranked = rank_by_similarity(mu, &ids, center)?;
        selected.extend_from_slice(&ranked[..k]);
    }
    selected.sort_unstable();
    Ok(selected)
}

/// Global medoid selector: the `k` trials most similar to the label-blind
/// medoid of the whole training set.
pub fn gw_select<T: Scalar>(
    train: &TrialSet<T>,
    mu: &SimilarityMatrix<T>,
    k: usize,
) -> Result<Vec<u64>> {
    if k == 0 {
        return Err(Error::Config("selection count k must be >= 1".into()));
    }
    let ids = train.ids();
    if ids.len() < k {
        return Err(Error::Config(format!(
            "training set has {} trials, cannot select k = {k}",
            ids.len()
        )));
    }
    let center = medoid(mu, &ids)?;
    let mut selected = rank_by_similarity(mu, &ids, center)?[..k].to_vec();
    selected.sort_unstable();
    Ok(selected)
}

fn check_m_k(m: usize, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::Config("selection count k must be >= 1".into()));
    }
    if k > m {
        return Err(Error::Config(format!(
            "k = {k} must not exceed the candidate pool size m = {m}"
        )));
    }
    Ok(())
}

/// Per-class nearest-to-test selector: for each test trial and each class,
/// the `m` nearest same-class training trials are shortlisted and the `k`
/// nearest of those kept; the union over test trials is the selection.
pub fn lrt_select<T: Scalar>(
    train: &TrialSet<T>,
    test: &TrialSet<T>,
    mu: &SimilarityMatrix<T>,
    m: usize,
    k: usize,
) -> Result<Vec<u64>> {
    check_m_k(m, k)?;
    let by_class = train.ids_by_class();
    for (label, ids) in &by_class {
        if ids.len() < m {
            return Err(Error::Config(format!(
                "class {label} has {} trials, candidate pool m = {m} too large",
                ids.len()
            )));
        }
    }
    let mut selected = std::collections::BTreeSet::new();
    for t in test.trials() {
        for ids in by_class.values() {
            let ranked = rank_by_similarity(mu, ids, t.id)?;
            let shortlist = &ranked[..m];
            selected.extend(shortlist.iter().take(k).copied());
        }
    }
    Ok(selected.into_iter().collect())
}

/// Label-blind nearest-to-test selector.
pub fn grt_select<T: Scalar>(
    train: &TrialSet<T>,
    test: &TrialSet<T>,
    mu: &SimilarityMatrix<T>,
    m: usize,
    k: usize,
) -> Result<Vec<u64>> {
    check_m_k(m, k)?;
    let ids = train.ids();
    if ids.len() < m {
        return Err(Error::Config(format!(
            "training set has {} trials, candidate pool m = {m} too large",
            ids.len()
        )));
    }
    let mut selected = std::collections::BTreeSet::new();
    for t in test.trials() {
        let ranked = rank_by_similarity(mu, &ids, t.id)?;
        let shortlist = &ranked[..m];
        selected.extend(shortlist.iter().take(k).copied());
    }
    Ok(selected.into_iter().collect())
}
