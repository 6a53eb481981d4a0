//! Test-case curves, box-plot statistics, clustering and dendrograms.

mod boxplot;
mod cluster;
mod dendrogram;
mod testcase;

pub use boxplot::{boxplot, level_boxplot, quantile, BoxPlotStats, Outlier};
pub use cluster::{classical_mds, cluster, cluster_with, ClusterMethod, ClusterResult};
pub use dendrogram::{dendrogram, Dendrogram, Merge};
pub use testcase::{default_splits, testcase1_curve, testcase2_curve, two_node_tree, CurvePoint};

use crate::concept::TreeError;
use crate::tree_metrics::MetricError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalysisError {
    #[error("need at least 2 concepts, got {0}")]
    TooFewConcepts(usize),
    #[error("k = {k} is outside 1..={n}")]
    BadK { k: usize, n: usize },
    #[error("split {first}/{second} does not describe N = {n} concepts on two nodes")]
    InvalidSplit { first: u64, second: u64, n: u64 },
    #[error("expected {expected} entries, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Metric(#[from] MetricError),
}
