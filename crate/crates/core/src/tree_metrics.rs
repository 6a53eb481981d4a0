//! Genealogy-tree variety metrics: SVS (Shah), NM (Nelson), IHI (Verhaegen),
//! HHID (Ahmed) and the bias-corrected Gini-Simpson index GSID.
//!
//! Count arithmetic is done in integers; only the final ratio is a float.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::concept::{GenealogyTree, TreeLevel};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricError {
    #[error("tree has no levels")]
    EmptyTree,
    #[error("metric needs at least {needed} concepts, got {got}")]
    TooFewConcepts { needed: u64, got: u64 },
    #[error("level {0} is not part of the tree")]
    UnknownLevel(u8),
    #[error("counts sum to {found}, expected N = {expected}")]
    CountMismatch { expected: u64, found: u64 },
    #[error("level weights sum to zero")]
    ZeroWeightSum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TreeMetric {
    Svs,
    Nm,
    Ihi,
    Hhid,
    Gsid,
}

impl TreeMetric {
    pub const ALL: [TreeMetric; 5] = [
        TreeMetric::Svs,
        TreeMetric::Nm,
        TreeMetric::Ihi,
        TreeMetric::Hhid,
        TreeMetric::Gsid,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TreeMetric::Svs => "svs",
            TreeMetric::Nm => "nm",
            TreeMetric::Ihi => "ihi",
            TreeMetric::Hhid => "hhid",
            TreeMetric::Gsid => "gsid",
        }
    }

    /// The level weights each metric was published with.
    pub fn published_weights(self) -> Option<[f64; 4]> {
        match self {
            TreeMetric::Svs | TreeMetric::Ihi => Some([10.0, 6.0, 3.0, 1.0]),
            TreeMetric::Nm => Some([10.0, 5.0, 2.0, 1.0]),
            TreeMetric::Hhid | TreeMetric::Gsid => None,
        }
    }
}

impl fmt::Display for TreeMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TreeMetric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        TreeMetric::ALL
            .into_iter()
            .find(|m| m.name() == lower)
            .ok_or_else(|| format!("unknown metric {s:?} (expected svs, nm, ihi, hhid or gsid)"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeMetricScore {
    pub metric: TreeMetric,
    /// Raw V^α keyed by level index.
    pub per_level: BTreeMap<u8, f64>,
    /// Aggregate over levels where the metric defines one.
    pub overall: Option<f64>,
    /// Per-level scores on the common 0–1 scale.
    pub scaled_per_level: BTreeMap<u8, f64>,
}

fn level_of(tree: &GenealogyTree, alpha: u8) -> Result<TreeLevel, MetricError> {
    tree.level(alpha).copied().ok_or(MetricError::UnknownLevel(alpha))
}

fn require_n(tree: &GenealogyTree, needed: u64) -> Result<u64, MetricError> {
    let n = tree.n();
    if n < needed {
        return Err(MetricError::TooFewConcepts { needed, got: n });
    }
    Ok(n)
}

fn weighted_over_functions(tree: &GenealogyTree, f: impl Fn(usize) -> f64) -> f64 {
    tree.function_weights()
        .iter()
        .enumerate()
        .map(|(j, fj)| fj * f(j))
        .sum()
}

fn sum_of_squares(counts: &[u64]) -> u128 {
    counts.iter().map(|&c| u128::from(c) * u128::from(c)).sum()
}

/// SVS contribution of one level: Σ_j f_j w_α β_α / N, zero wherever β_α = 1.
pub fn shah_level(tree: &GenealogyTree, alpha: u8) -> Result<f64, MetricError> {
    let level = level_of(tree, alpha)?;
    let n = require_n(tree, 1)?;
    Ok(weighted_over_functions(tree, |j| {
        let beta = tree.branches(j, alpha);
        if beta <= 1 {
            0.0
        } else {
            level.weight * beta as f64 / n as f64
        }
    }))
}

/// Shah's variety V = Σ_j f_j Σ_α w_α β_α / N on a 0–10 scale.
pub fn shah_variety(tree: &GenealogyTree) -> Result<f64, MetricError> {
    if tree.levels().is_empty() {
        return Err(MetricError::EmptyTree);
    }
    tree.levels()
        .iter()
        .map(|l| shah_level(tree, l.alpha))
        .sum()
}

/// NM numerator contribution of one level: Σ_j f_j w_α (differentiations at α).
pub fn nelson_level(tree: &GenealogyTree, alpha: u8) -> Result<f64, MetricError> {
    let level = level_of(tree, alpha)?;
    require_n(tree, 1)?;
    Ok(weighted_over_functions(tree, |j| {
        level.weight * tree.differentiations(j, alpha).unwrap_or(0) as f64
    }))
}

/// Nelson's variety; `normalized` divides by N − 1.
pub fn nelson_variety(tree: &GenealogyTree, normalized: bool) -> Result<f64, MetricError> {
    if tree.levels().is_empty() {
        return Err(MetricError::EmptyTree);
    }
    let numerator: f64 = tree
        .levels()
        .iter()
        .map(|l| nelson_level(tree, l.alpha))
        .sum::<Result<f64, _>>()?;
    if normalized {
        let n = require_n(tree, 2)?;
        Ok(numerator / (n - 1) as f64)
    } else {
        Ok(numerator)
    }
}

/// Inverse-Herfindahl variety at one level: w_α Σ_j f_j / (N H_α).
pub fn ihi_level(tree: &GenealogyTree, alpha: u8) -> Result<f64, MetricError> {
    let level = level_of(tree, alpha)?;
    let n = require_n(tree, 1)?;
    // 1 / (N H) = N / Σ n_i²
    Ok(level.weight
        * weighted_over_functions(tree, |j| {
            n as f64 / sum_of_squares(&tree.counts(j, alpha)) as f64
        }))
}

/// Weighted-average IHI: Σ V^α / Σ w_α over the levels present in `per_level`.
pub fn ihi_overall(
    per_level: &BTreeMap<u8, f64>,
    levels: &[TreeLevel],
) -> Result<f64, MetricError> {
    if per_level.is_empty() {
        return Err(MetricError::EmptyTree);
    }
    let mut total_weight = 0.0;
    for alpha in per_level.keys() {
        let level = levels
            .iter()
            .find(|l| l.alpha == *alpha)
            .ok_or(MetricError::UnknownLevel(*alpha))?;
        total_weight += level.weight;
    }
    if total_weight <= 0.0 {
        return Err(MetricError::ZeroWeightSum);
    }
    Ok(per_level.values().sum::<f64>() / total_weight)
}

fn check_counts(counts: &[u64], n: u64) -> Result<(), MetricError> {
    let found: u64 = counts.iter().sum();
    if found != n {
        return Err(MetricError::CountMismatch { expected: n, found });
    }
    Ok(())
}

/// HHID: 1 − Σ n_i² / N².
pub fn hhid_level(counts: &[u64], n: u64) -> Result<f64, MetricError> {
    if n < 1 {
        return Err(MetricError::TooFewConcepts { needed: 1, got: n });
    }
    check_counts(counts, n)?;
    let total = u128::from(n) * u128::from(n);
    Ok((total - sum_of_squares(counts)) as f64 / total as f64)
}

/// GSID: 1 − Σ n_i (n_i − 1) / (N (N − 1)), Simpson's unbiased λ̂.
pub fn gsid_level(counts: &[u64], n: u64) -> Result<f64, MetricError> {
    if n < 2 {
        return Err(MetricError::TooFewConcepts { needed: 2, got: n });
    }
    check_counts(counts, n)?;
    let same: u128 = counts
        .iter()
        .map(|&c| u128::from(c) * u128::from(c.saturating_sub(1)))
        .sum();
    let pairs = u128::from(n) * u128::from(n - 1);
    Ok((pairs - same) as f64 / pairs as f64)
}

/// Maps a single-function per-level score onto the 0–1 scale used when
/// comparing metrics side by side. HHID and GSID pass through unchanged.
pub fn scale_to_unit(metric: TreeMetric, score: f64, level: &TreeLevel, n: u64) -> f64 {
    match metric {
        TreeMetric::Hhid | TreeMetric::Gsid => score,
        _ if level.weight == 0.0 => 0.0,
        TreeMetric::Svs | TreeMetric::Ihi => score / level.weight,
        TreeMetric::Nm if n < 2 => 0.0,
        TreeMetric::Nm => score / (level.weight * (n - 1) as f64),
    }
}

fn unit_level(tree: &GenealogyTree, metric: TreeMetric, alpha: u8) -> Result<f64, MetricError> {
    let n = tree.n();
    let value = match metric {
        TreeMetric::Svs => weighted_over_functions(tree, |j| match tree.branches(j, alpha) {
            0 | 1 => 0.0,
            beta => beta as f64 / n as f64,
        }),
        TreeMetric::Nm if n < 2 => 0.0,
        TreeMetric::Nm => weighted_over_functions(tree, |j| {
            tree.differentiations(j, alpha).unwrap_or(0) as f64 / (n - 1) as f64
        }),
        TreeMetric::Ihi => weighted_over_functions(tree, |j| {
            n as f64 / sum_of_squares(&tree.counts(j, alpha)) as f64
        }),
        TreeMetric::Hhid => return hhid_tree_level(tree, alpha),
        TreeMetric::Gsid => return gsid_tree_level(tree, alpha),
    };
    Ok(value)
}

fn hhid_tree_level(tree: &GenealogyTree, alpha: u8) -> Result<f64, MetricError> {
    level_of(tree, alpha)?;
    let n = tree.n();
    tree.function_weights()
        .iter()
        .enumerate()
        .map(|(j, fj)| Ok(fj * hhid_level(&tree.counts(j, alpha), n)?))
        .sum()
}

fn gsid_tree_level(tree: &GenealogyTree, alpha: u8) -> Result<f64, MetricError> {
    level_of(tree, alpha)?;
    let n = tree.n();
    tree.function_weights()
        .iter()
        .enumerate()
        .map(|(j, fj)| Ok(fj * gsid_level(&tree.counts(j, alpha), n)?))
        .sum()
}

/// Evaluates one metric over every level of a tree.
pub fn score_tree(tree: &GenealogyTree, metric: TreeMetric) -> Result<TreeMetricScore, MetricError> {
    if tree.levels().is_empty() {
        return Err(MetricError::EmptyTree);
    }
    let mut per_level = BTreeMap::new();
    let mut scaled_per_level = BTreeMap::new();
    for level in tree.levels() {
        let raw = match metric {
            TreeMetric::Svs => shah_level(tree, level.alpha)?,
            TreeMetric::Nm => nelson_level(tree, level.alpha)?,
            TreeMetric::Ihi => ihi_level(tree, level.alpha)?,
            TreeMetric::Hhid => hhid_tree_level(tree, level.alpha)?,
            TreeMetric::Gsid => gsid_tree_level(tree, level.alpha)?,
        };
        per_level.insert(level.alpha, raw);
        scaled_per_level.insert(level.alpha, unit_level(tree, metric, level.alpha)?);
    }
    let overall = match metric {
        TreeMetric::Svs => Some(shah_variety(tree)?),
        TreeMetric::Nm if tree.n() >= 2 => Some(nelson_variety(tree, true)?),
        TreeMetric::Nm => None,
        TreeMetric::Ihi => Some(ihi_overall(&per_level, tree.levels())?),
        TreeMetric::Hhid | TreeMetric::Gsid => None,
    };
    Ok(TreeMetricScore {
        metric,
        per_level,
        overall,
        scaled_per_level,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concept::{tree_from_assignments, LevelScheme};
    use approx::assert_abs_diff_eq;

    fn ca() -> GenealogyTree {
        tree_from_assignments(
            &[
                vec!["cf", "w1"],
                vec!["cf", "w2"],
                vec!["pd", "w3"],
                vec!["pd", "w4"],
                vec!["pd", "w5"],
            ],
            &LevelScheme::Shah,
        )
        .unwrap()
    }

    fn cb() -> GenealogyTree {
        tree_from_assignments(
            &[
                vec!["cf", "w1"],
                vec!["pd", "w2"],
                vec!["pd", "w3"],
                vec!["pd", "w4"],
                vec!["pd", "w5"],
            ],
            &LevelScheme::Shah,
        )
        .unwrap()
    }

    fn chain(n: usize) -> GenealogyTree {
        tree_from_assignments(&vec![vec!["a", "b"]; n], &LevelScheme::Shah).unwrap()
    }

    #[test]
    fn shah_worked_examples() {
        assert_abs_diff_eq!(shah_variety(&ca()).unwrap(), 10.0, epsilon = 1e-12);
        assert_abs_diff_eq!(shah_variety(&cb()).unwrap(), 10.0, epsilon = 1e-12);
        assert_eq!(shah_variety(&chain(5)).unwrap(), 0.0);
    }

    #[test]
    fn nelson_worked_examples() {
        let nm = |t: &GenealogyTree| t.reweighted(&[10.0, 5.0]).unwrap();
        assert_abs_diff_eq!(nelson_variety(&nm(&ca()), true).unwrap(), 6.25, epsilon = 1e-12);
        assert_abs_diff_eq!(nelson_variety(&nm(&cb()), true).unwrap(), 6.25, epsilon = 1e-12);
        assert_abs_diff_eq!(nelson_variety(&nm(&ca()), false).unwrap(), 25.0, epsilon = 1e-12);
        assert_eq!(nelson_variety(&chain(4), true).unwrap(), 0.0);
        assert_eq!(
            nelson_variety(&chain(1), true),
            Err(MetricError::TooFewConcepts { needed: 2, got: 1 })
        );
    }

    #[test]
    fn ihi_worked_examples() {
        let tree = ca();
        assert_abs_diff_eq!(ihi_level(&tree, 1).unwrap(), 50.0 / 13.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ihi_level(&tree, 2).unwrap(), 6.0, epsilon = 1e-12);
        assert_eq!(ihi_level(&tree, 3), Err(MetricError::UnknownLevel(3)));
        let score = score_tree(&tree, TreeMetric::Ihi).unwrap();
        assert_abs_diff_eq!(score.overall.unwrap(), (50.0 / 13.0 + 6.0) / 16.0, epsilon = 1e-12);
        let cb_score = score_tree(&cb(), TreeMetric::Ihi).unwrap();
        assert_abs_diff_eq!(cb_score.overall.unwrap(), (50.0 / 17.0 + 6.0) / 16.0, epsilon = 1e-12);
        assert_abs_diff_eq!(cb_score.overall.unwrap(), 0.5588, epsilon = 1e-4);
    }

    #[test]
    fn ihi_single_branch_is_not_zero() {
        let tree = tree_from_assignments(&vec![vec!["only"]; 20], &LevelScheme::Custom(vec![TreeLevel { alpha: 1, weight: 1.0 }])).unwrap();
        assert_abs_diff_eq!(ihi_level(&tree, 1).unwrap(), 0.05, epsilon = 1e-15);
    }

    #[test]
    fn ihi_overall_at_maximum() {
        let levels = [TreeLevel { alpha: 1, weight: 4.0 }];
        let per_level = BTreeMap::from([(1u8, 4.0)]);
        assert_eq!(ihi_overall(&per_level, &levels).unwrap(), 1.0);
        assert_eq!(ihi_overall(&BTreeMap::new(), &levels), Err(MetricError::EmptyTree));
    }

    #[test]
    fn hhid_and_gsid_examples() {
        assert_abs_diff_eq!(hhid_level(&[2, 3], 5).unwrap(), 0.48, epsilon = 1e-15);
        assert_abs_diff_eq!(hhid_level(&[1; 5], 5).unwrap(), 0.8, epsilon = 1e-15);
        assert_eq!(hhid_level(&[1, 1], 2).unwrap(), 0.5);
        assert_eq!(hhid_level(&[7], 7).unwrap(), 0.0);
        assert_eq!(
            hhid_level(&[1, 2], 4),
            Err(MetricError::CountMismatch { expected: 4, found: 3 })
        );

        assert_abs_diff_eq!(gsid_level(&[2, 3], 5).unwrap(), 0.6, epsilon = 1e-15);
        assert_eq!(gsid_level(&[1; 5], 5).unwrap(), 1.0);
        assert_eq!(gsid_level(&[1, 1], 2).unwrap(), 1.0);
        assert_abs_diff_eq!(gsid_level(&[10, 10], 20).unwrap(), 1.0 - 180.0 / 380.0, epsilon = 1e-15);
        assert_eq!(
            gsid_level(&[1], 1),
            Err(MetricError::TooFewConcepts { needed: 2, got: 1 })
        );
    }

    #[test]
    fn scale_matches_structural_computation() {
        for tree in [ca(), cb(), chain(6)] {
            for metric in TreeMetric::ALL {
                let score = score_tree(&tree, metric).unwrap();
                for level in tree.levels() {
                    let raw = score.per_level[&level.alpha];
                    let via_scale = scale_to_unit(metric, raw, level, tree.n());
                    assert_abs_diff_eq!(via_scale, score.scaled_per_level[&level.alpha], epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn scaled_examples() {
        let two = tree_from_assignments(&[vec!["a"], vec!["b"]], &LevelScheme::Shah).unwrap();
        let s = score_tree(&two, TreeMetric::Svs).unwrap();
        assert_eq!(s.scaled_per_level[&1], 1.0);
        let nm = score_tree(&chain(4), TreeMetric::Nm).unwrap();
        assert_eq!(nm.scaled_per_level[&1], 0.0);
        assert_eq!(nm.scaled_per_level[&2], 0.0);
    }

    #[test]
    fn empty_tree_errors() {
        let empty = GenealogyTree::new(vec![], vec![], vec![]).unwrap();
        assert_eq!(shah_variety(&empty), Err(MetricError::EmptyTree));
        assert_eq!(nelson_variety(&empty, false), Err(MetricError::EmptyTree));
        assert_eq!(score_tree(&empty, TreeMetric::Gsid), Err(MetricError::EmptyTree));
    }

    #[test]
    fn multi_function_weights_combine_linearly() {
        use crate::concept::IdeaNode;
        let node = |f: usize, label: &str, count| IdeaNode {
            level: 1,
            label: label.into(),
            parent: None,
            count,
            function: f,
        };
        let levels = vec![TreeLevel { alpha: 1, weight: 10.0 }];
        let tree = GenealogyTree::new(
            levels,
            vec![node(0, "a", 2), node(0, "b", 2), node(1, "a", 4)],
            vec![1.0, 3.0],
        )
        .unwrap();
        // function 0: 10·2/4 = 5, function 1: single branch → 0
        assert_abs_diff_eq!(shah_variety(&tree).unwrap(), 0.25 * 5.0, epsilon = 1e-12);
        let gsid = score_tree(&tree, TreeMetric::Gsid).unwrap();
        assert_abs_diff_eq!(gsid.per_level[&1], 0.25 * (1.0 - 4.0 / 12.0), epsilon = 1e-12);
    }
}
