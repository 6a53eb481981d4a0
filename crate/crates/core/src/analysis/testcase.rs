//! Sensitivity curves for two-node idea spaces: skewed splits at fixed N
//! (Test Case I) and even splits at growing N (Test Case II).

use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::concept::{GenealogyTree, IdeaNode, TreeLevel};
use crate::tree_metrics::{score_tree, TreeMetric};

/// Unit-scaled scores of all five tree metrics for one concept space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    /// "a/b" for a split, or N for the even-split curve.
    pub label: String,
    pub n: u64,
    pub first: u64,
    pub second: u64,
    pub svs: f64,
    pub nm: f64,
    pub ihi: f64,
    pub hhid: f64,
    pub gsid: f64,
}

impl CurvePoint {
    pub fn get(&self, metric: TreeMetric) -> f64 {
        match metric {
            TreeMetric::Svs => self.svs,
            TreeMetric::Nm => self.nm,
            TreeMetric::Ihi => self.ihi,
            TreeMetric::Hhid => self.hhid,
            TreeMetric::Gsid => self.gsid,
        }
    }
}

/// A one-level tree with two idea nodes holding `first` and `second` concepts.
pub fn two_node_tree(first: u64, second: u64) -> Result<GenealogyTree, AnalysisError> {
    let node = |label: &str, count| IdeaNode {
        level: 1,
        label: label.to_string(),
        parent: None,
        count,
        function: 0,
    };
    Ok(GenealogyTree::new(
        vec![TreeLevel { alpha: 1, weight: 1.0 }],
        vec![node("first", first), node("second", second)],
        vec![1.0],
    )?)
}

fn point(label: String, first: u64, second: u64) -> Result<CurvePoint, AnalysisError> {
    let tree = two_node_tree(first, second)?;
    let scaled = |metric| -> Result<f64, AnalysisError> {
        Ok(score_tree(&tree, metric)?.scaled_per_level[&1])
    };
    Ok(CurvePoint {
        label,
        n: first + second,
        first,
        second,
        svs: scaled(TreeMetric::Svs)?,
        nm: scaled(TreeMetric::Nm)?,
        ihi: scaled(TreeMetric::Ihi)?,
        hhid: scaled(TreeMetric::Hhid)?,
        gsid: scaled(TreeMetric::Gsid)?,
    })
}

/// Splits 0/N, 1/(N−1), …, ⌊N/2⌋/⌈N/2⌉.
pub fn default_splits(n: u64) -> Vec<(u64, u64)> {
    (0..=n / 2).map(|a| (a, n - a)).collect()
}

pub fn testcase1_curve(n: u64, splits: &[(u64, u64)]) -> Result<Vec<CurvePoint>, AnalysisError> {
    if n < 2 {
        return Err(AnalysisError::TooFewConcepts(n as usize));
    }
    splits
        .iter()
        .map(|&(a, b)| {
            if a + b != n {
                return Err(AnalysisError::InvalidSplit { first: a, second: b, n });
            }
            point(format!("{a}/{b}"), a, b)
        })
        .collect()
}

pub fn testcase2_curve(ns: &[u64]) -> Result<Vec<CurvePoint>, AnalysisError> {
    ns.iter()
        .map(|&n| {
            if n < 2 || n % 2 != 0 {
                return Err(AnalysisError::InvalidSplit {
                    first: n / 2,
                    second: n - n / 2,
                    n,
                });
            }
            point(n.to_string(), n / 2, n / 2)
        })
        .collect()
}
