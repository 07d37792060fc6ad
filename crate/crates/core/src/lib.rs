//! Instance selection for labeled time series via per-class maximum-weight
//! cliques on a similarity-weighted graph.
//!
//! The pipeline, end to end:
//!
//! 1. [`ingest`] loads (or synthesizes) labeled trials and produces
//!    stratified train/test splits.
//! 2. [`similarity`] scores every trial pair with a blend of normalized
//!    discrete Fréchet distance and local-trend correlation, yielding a
//!    symmetric matrix of edge weights in `[0, 1]`.
//! 3. [`graph`] turns the matrix into a vertex- and edge-weighted graph
//!    (vertex weight = mean similarity to the rest) with threshold pruning.
//! 4. [`threshold`] picks per-class similarity thresholds from the
//!    histogram of matrix entries by inverse cumulative mass.
//! 5. [`clique`] grows one maximum-weight clique per class on the pruned
//!    graph; clique members are the selected training instances.
//! 6. [`baselines`] provides medoid- and nearest-to-test selectors for
//!    comparison, and [`eval`] wires everything into a repeated hold-out
//!    experiment scored with Rand index, F-score and Fleiss' kappa.
//!
//! All numeric code is generic over [`Scalar`] (`f32` or `f64`); the
//! `*64` aliases at the crate root pick the double-precision instantiation
//! used by the CLI.

pub mod baselines;
pub mod clique;
pub mod error;
pub mod eval;
pub mod graph;
pub mod ingest;
pub mod scalar;
pub mod similarity;
pub mod threshold;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use clique::{Clique, SelectionResult};
pub use eval::{EvalReport, ExperimentConfig, Selector};
pub use graph::WeightedGraph;
pub use ingest::{SplitPlan, SynthConfig, Trial, TrialSet};
pub use similarity::{SimilarityMatrix, SimilarityParams};
pub use threshold::SimilarityHistogram;

/// Double-precision instantiations, the default for the CLI.
pub type Trial64 = ingest::Trial<f64>;
pub type TrialSet64 = ingest::TrialSet<f64>;
pub type SimilarityMatrix64 = similarity::SimilarityMatrix<f64>;
pub type WeightedGraph64 = graph::WeightedGraph<f64>;
pub type SelectionResult64 = clique::SelectionResult<f64>;
pub type EvalReport64 = eval::EvalReport<f64>;

/// Single-precision instantiations.
pub type Trial32 = ingest::Trial<f32>;
pub type TrialSet32 = ingest::TrialSet<f32>;
pub type SimilarityMatrix32 = similarity::SimilarityMatrix<f32>;
