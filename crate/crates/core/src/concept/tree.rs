//! Genealogy trees: concepts grouped by shared ideas at each abstraction level.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TreeError {
    #[error("label {label:?} at level {level} appears under parents {first:?} and {second:?}")]
    InconsistentHierarchy {
        level: u8,
        label: String,
        first: String,
        second: String,
    },
    #[error("tree levels must have strictly increasing alpha (saw {0} after {1})")]
    UnorderedLevels(u8, u8),
    #[error("level {alpha} has invalid weight {weight}")]
    InvalidLevelWeight { alpha: u8, weight: f64 },
    #[error("node {label:?} refers to level {level}, which the tree does not declare")]
    UnknownLevel { level: u8, label: String },
    #[error("duplicate label {label:?} at level {level} (function {function})")]
    DuplicateLabel {
        function: usize,
        level: u8,
        label: String,
    },
    #[error("node {label:?} at level {level} names parent {parent:?}, which is not a node of the level above")]
    UnknownParent {
        level: u8,
        label: String,
        parent: String,
    },
    #[error("node {label:?} at level {level} needs a parent")]
    MissingParent { level: u8, label: String },
    #[error("node {label:?} at the top level cannot have a parent")]
    UnexpectedParent { label: String },
    #[error("function {function}, level {level}: counts sum to {found}, expected N = {expected}")]
    CountMismatch {
        function: usize,
        level: u8,
        expected: u64,
        found: u64,
    },
    #[error("node {label:?} at level {level} has count {count} but its children sum to {children}")]
    ChildSumMismatch {
        level: u8,
        label: String,
        count: u64,
        children: u64,
    },
    #[error("function weights: {0}")]
    FunctionWeights(String),
    #[error("assignments: {0}")]
    Assignments(String),
}

/// A level descriptor: the level index α and its weight w_α.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeLevel {
    pub alpha: u8,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdeaNode {
    pub level: u8,
    pub label: String,
    pub parent: Option<String>,
    pub count: u64,
    /// Index j of the design function this node belongs to.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub function: usize,
}

fn is_zero(v: &usize) -> bool {
    *v == 0
}

/// Named level layouts.
#[derive(Debug, Clone, PartialEq)]
pub enum LevelScheme {
    /// physical principle / working principle / embodiment / detail, weights 10, 6, 3, 1.
    Shah,
    /// Same four levels with weights 10, 5, 2, 1.
    Nelson,
    /// The seven SAPPhIRE levels with w_α = α.
    Sapphire,
    Custom(Vec<TreeLevel>),
}

impl LevelScheme {
    pub fn levels(&self) -> Vec<TreeLevel> {
        let from = |ws: &[f64]| {
            ws.iter()
                .enumerate()
                .map(|(i, &weight)| TreeLevel {
                    alpha: i as u8 + 1,
                    weight,
                })
                .collect()
        };
        match self {
            LevelScheme::Shah => from(&[10.0, 6.0, 3.0, 1.0]),
            LevelScheme::Nelson => from(&[10.0, 5.0, 2.0, 1.0]),
            LevelScheme::Sapphire => from(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]),
            LevelScheme::Custom(levels) => levels.clone(),
        }
    }

    pub fn level_name(&self, alpha: u8) -> Option<&'static str> {
        const FOUR: [&str; 4] = [
            "physical principle",
            "working principle",
            "embodiment",
            "detail",
        ];
        match self {
            LevelScheme::Shah | LevelScheme::Nelson => FOUR.get(usize::from(alpha).checked_sub(1)?).copied(),
            LevelScheme::Sapphire => {
                crate::concept::AbstractionLevel::from_index(alpha).map(|l| l.display_name())
            }
            LevelScheme::Custom(_) => None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawTree {
    levels: Vec<TreeLevel>,
    nodes: Vec<IdeaNode>,
    #[serde(default)]
    function_weights: Vec<f64>,
}

/// A validated genealogy tree, possibly one per design function.
///
/// Per function and level the positive node counts sum to the same N. The
/// function weights f_j are normalized to sum to 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTree", into = "RawTree")]
pub struct GenealogyTree {
    levels: Vec<TreeLevel>,
    nodes: Vec<IdeaNode>,
    function_weights: Vec<f64>,
    n: u64,
}

impl TryFrom<RawTree> for GenealogyTree {
    type Error = TreeError;

    fn try_from(raw: RawTree) -> Result<Self, Self::Error> {
        GenealogyTree::new(raw.levels, raw.nodes, raw.function_weights)
    }
}

impl From<GenealogyTree> for RawTree {
    fn from(t: GenealogyTree) -> Self {
        RawTree {
            levels: t.levels,
            nodes: t.nodes,
            function_weights: t.function_weights,
        }
    }
}

impl GenealogyTree {
    /// Builds and validates a tree. An empty `function_weights` means uniform.
    pub fn new(
        levels: Vec<TreeLevel>,
        nodes: Vec<IdeaNode>,
        function_weights: Vec<f64>,
    ) -> Result<Self, TreeError> {
        for pair in levels.windows(2) {
            if pair[1].alpha <= pair[0].alpha {
                return Err(TreeError::UnorderedLevels(pair[1].alpha, pair[0].alpha));
            }
        }
        for l in &levels {
            if !l.weight.is_finite() || l.weight < 0.0 {
                return Err(TreeError::InvalidLevelWeight {
                    alpha: l.alpha,
                    weight: l.weight,
                });
            }
        }

        let m = nodes.iter().map(|n| n.function + 1).max().unwrap_or(1);
        let function_weights = normalize_function_weights(function_weights, m)?;

        let position: HashMap<u8, usize> = levels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.alpha, i))
            .collect();

        // (function, level position, label) -> count
        let mut index: HashMap<(usize, usize, &str), u64> = HashMap::new();
        for node in &nodes {
            let pos = *position.get(&node.level).ok_or_else(|| TreeError::UnknownLevel {
                level: node.level,
                label: node.label.clone(),
            })?;
            if index
                .insert((node.function, pos, node.label.as_str()), node.count)
                .is_some()
            {
                return Err(TreeError::DuplicateLabel {
                    function: node.function,
                    level: node.level,
                    label: node.label.clone(),
                });
            }
        }

        let mut child_sums: HashMap<(usize, usize, &str), u64> = HashMap::new();
        for node in &nodes {
            let pos = position[&node.level];
            match (&node.parent, pos) {
                (Some(_), 0) => {
                    return Err(TreeError::UnexpectedParent {
                        label: node.label.clone(),
                    })
                }
                (None, 0) => {}
                (None, _) => {
                    return Err(TreeError::MissingParent {
                        level: node.level,
                        label: node.label.clone(),
                    })
                }
                (Some(parent), _) => {
                    let key = (node.function, pos - 1, parent.as_str());
                    if !index.contains_key(&key) {
                        return Err(TreeError::UnknownParent {
                            level: node.level,
                            label: node.label.clone(),
                            parent: parent.clone(),
                        });
                    }
                    *child_sums.entry(key).or_default() += node.count;
                }
            }
        }
        for node in &nodes {
            let key = (node.function, position[&node.level], node.label.as_str());
            if let Some(&children) = child_sums.get(&key) {
                if children != node.count {
                    return Err(TreeError::ChildSumMismatch {
                        level: node.level,
                        label: node.label.clone(),
                        count: node.count,
                        children,
                    });
                }
            }
        }

        let mut sums: BTreeMap<(usize, usize), u64> = BTreeMap::new();
        for node in &nodes {
            *sums.entry((node.function, position[&node.level])).or_default() += node.count;
        }
        let n = sums.values().next().copied().unwrap_or(0);
        for function in 0..m {
            for (pos, level) in levels.iter().enumerate() {
                let found = sums.get(&(function, pos)).copied().unwrap_or(0);
                if found != n {
                    return Err(TreeError::CountMismatch {
                        function,
                        level: level.alpha,
                        expected: n,
                        found,
                    });
                }
            }
        }

        Ok(Self {
            levels,
            nodes,
            function_weights,
            n,
        })
    }

    pub fn levels(&self) -> &[TreeLevel] {
        &self.levels
    }

    pub fn nodes(&self) -> &[IdeaNode] {
        &self.nodes
    }

    /// Number of concepts N.
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn function_count(&self) -> usize {
        self.function_weights.len()
    }

    /// Normalized f_j.
    pub fn function_weights(&self) -> &[f64] {
        &self.function_weights
    }

    pub fn level(&self, alpha: u8) -> Option<&TreeLevel> {
        self.levels.iter().find(|l| l.alpha == alpha)
    }

    fn position(&self, alpha: u8) -> Option<usize> {
        self.levels.iter().position(|l| l.alpha == alpha)
    }

    pub fn nodes_at(&self, function: usize, alpha: u8) -> impl Iterator<Item = &IdeaNode> {
        self.nodes
            .iter()
            .filter(move |n| n.function == function && n.level == alpha)
    }

    /// Concept counts n_i^α of the occupied nodes, in declaration order.
    pub fn counts(&self, function: usize, alpha: u8) -> Vec<u64> {
        self.nodes_at(function, alpha)
            .map(|n| n.count)
            .filter(|&c| c > 0)
            .collect()
    }

    /// β_α: number of occupied nodes. Zero-count nodes are not branches.
    pub fn branches(&self, function: usize, alpha: u8) -> usize {
        self.nodes_at(function, alpha).filter(|n| n.count > 0).count()
    }

    /// Differentiations at a level: β_1 − 1 on the top level, otherwise
    /// Σ_l d_l over the nodes l of the level above, where d_l is the number
    /// of occupied children of l minus one (never negative).
    pub fn differentiations(&self, function: usize, alpha: u8) -> Option<u64> {
        let pos = self.position(alpha)?;
        if pos == 0 {
            return Some(self.branches(function, alpha).saturating_sub(1) as u64);
        }
        let mut children: BTreeMap<&str, u64> = BTreeMap::new();
        for node in self.nodes_at(function, alpha).filter(|n| n.count > 0) {
            if let Some(parent) = &node.parent {
                *children.entry(parent.as_str()).or_default() += 1;
            }
        }
        Some(children.values().map(|&c| c.saturating_sub(1)).sum())
    }

    /// Same tree with its level weights replaced; `weights[i]` goes to the i-th declared level.
    pub fn reweighted(&self, weights: &[f64]) -> Result<Self, TreeError> {
        if weights.len() < self.levels.len() {
            return Err(TreeError::InvalidLevelWeight {
                alpha: self.levels[weights.len()].alpha,
                weight: f64::NAN,
            });
        }
        let levels = self
            .levels
            .iter()
            .zip(weights)
            .map(|(l, &weight)| TreeLevel {
                alpha: l.alpha,
                weight,
            })
            .collect();
        Self::new(levels, self.nodes.clone(), self.function_weights.clone())
    }
}

fn normalize_function_weights(weights: Vec<f64>, m: usize) -> Result<Vec<f64>, TreeError> {
    if weights.is_empty() {
        return Ok(vec![1.0 / m as f64; m]);
    }
    if weights.len() != m {
        return Err(TreeError::FunctionWeights(format!(
            "{} weights given for {} functions",
            weights.len(),
            m
        )));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(TreeError::FunctionWeights(
            "weights must be finite and non-negative".into(),
        ));
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(TreeError::FunctionWeights("weights sum to zero".into()));
    }
    Ok(weights.into_iter().map(|w| w / total).collect())
}

/// Builds a single-function tree from per-concept idea labels.
///
/// `assignments[c][l]` is the label concept `c` uses at the l-th level of
/// `scheme`. Every concept must carry the same number of labels; the tree
/// uses that many leading levels of the scheme. A label is one node per
/// level, so reusing a label under two different parents is an error.
pub fn tree_from_assignments<S: AsRef<str>>(
    assignments: &[Vec<S>],
    scheme: &LevelScheme,
) -> Result<GenealogyTree, TreeError> {
    let depth = assignments
        .first()
        .map(Vec::len)
        .ok_or_else(|| TreeError::Assignments("no concepts".into()))?;
    if depth == 0 {
        return Err(TreeError::Assignments("concepts carry no labels".into()));
    }
    if let Some(bad) = assignments.iter().position(|a| a.len() != depth) {
        return Err(TreeError::Assignments(format!(
            "concept {} has {} labels, expected {}",
            bad + 1,
            assignments[bad].len(),
            depth
        )));
    }
    let all_levels = scheme.levels();
    if depth > all_levels.len() {
        return Err(TreeError::Assignments(format!(
            "{} labels per concept but the scheme has {} levels",
            depth,
            all_levels.len()
        )));
    }
    let levels: Vec<TreeLevel> = all_levels.into_iter().take(depth).collect();

    let mut nodes: Vec<IdeaNode> = Vec::new();
    let mut slot: HashMap<(usize, &str), usize> = HashMap::new();
    for labels in assignments {
        for (depth_idx, label) in labels.iter().enumerate() {
            let label = label.as_ref();
            let parent = depth_idx
                .checked_sub(1)
                .map(|p| labels[p].as_ref().to_string());
            match slot.get(&(depth_idx, label)) {
                Some(&i) => {
                    if nodes[i].parent != parent {
                        return Err(TreeError::InconsistentHierarchy {
                            level: levels[depth_idx].alpha,
                            label: label.to_string(),
                            first: nodes[i].parent.clone().unwrap_or_default(),
                            second: parent.unwrap_or_default(),
                        });
                    }
                    nodes[i].count += 1;
                }
                None => {
                    slot.insert((depth_idx, label), nodes.len());
                    nodes.push(IdeaNode {
                        level: levels[depth_idx].alpha,
                        label: label.to_string(),
                        parent,
                        count: 1,
                        function: 0,
                    });
                }
            }
        }
    }
    GenealogyTree::new(levels, nodes, vec![1.0])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ca_assignments() -> Vec<Vec<&'static str>> {
        vec![
            vec!["centrifugal force", "radial impeller"],
            vec!["centrifugal force", "mixed-flow impeller"],
            vec!["positive displacement", "piston"],
            vec!["positive displacement", "gear"],
            vec!["positive displacement", "diaphragm"],
        ]
    }

    #[test]
    fn ca_tree_counts() {
        let tree = tree_from_assignments(&ca_assignments(), &LevelScheme::Shah).unwrap();
        assert_eq!(tree.n(), 5);
        assert_eq!(tree.levels().len(), 2);
        assert_eq!(tree.branches(0, 1), 2);
        assert_eq!(tree.branches(0, 2), 5);
        assert_eq!(tree.counts(0, 1), vec![2, 3]);
        assert_eq!(tree.counts(0, 2), vec![1; 5]);
        assert_eq!(tree.differentiations(0, 1), Some(1));
        assert_eq!(tree.differentiations(0, 2), Some(3));
    }

    #[test]
    fn cb_tree_counts() {
        let cb = vec![
            vec!["centrifugal force", "radial impeller"],
            vec!["positive displacement", "piston"],
            vec!["positive displacement", "gear"],
            vec!["positive displacement", "diaphragm"],
            vec!["positive displacement", "peristaltic"],
        ];
        let tree = tree_from_assignments(&cb, &LevelScheme::Shah).unwrap();
        assert_eq!(tree.counts(0, 1), vec![1, 4]);
        assert_eq!(tree.branches(0, 2), 5);
        assert_eq!(tree.differentiations(0, 2), Some(3));
    }

    #[test]
    fn single_chain() {
        let same = vec![vec!["a", "b", "c"]; 6];
        let tree = tree_from_assignments(&same, &LevelScheme::Shah).unwrap();
        for l in tree.levels() {
            assert_eq!(tree.branches(0, l.alpha), 1);
            assert_eq!(tree.counts(0, l.alpha), vec![6]);
        }
    }

    #[test]
    fn inconsistent_hierarchy() {
        let bad = vec![vec!["p1", "w"], vec!["p2", "w"]];
        assert!(matches!(
            tree_from_assignments(&bad, &LevelScheme::Shah),
            Err(TreeError::InconsistentHierarchy { level: 2, .. })
        ));
    }

    #[test]
    fn ragged_assignments_rejected() {
        let bad = vec![vec!["p1", "w"], vec!["p2"]];
        assert!(matches!(
            tree_from_assignments(&bad, &LevelScheme::Shah),
            Err(TreeError::Assignments(_))
        ));
        let deep = vec![vec!["x"; 5]];
        assert!(tree_from_assignments(&deep, &LevelScheme::Shah).is_err());
        assert!(tree_from_assignments(&deep, &LevelScheme::Sapphire).is_ok());
    }

    fn node(level: u8, label: &str, parent: Option<&str>, count: u64) -> IdeaNode {
        IdeaNode {
            level,
            label: label.into(),
            parent: parent.map(Into::into),
            count,
            function: 0,
        }
    }

    #[test]
    fn count_invariants_are_checked() {
        let levels = LevelScheme::Shah.levels()[..2].to_vec();
        let err = GenealogyTree::new(
            levels.clone(),
            vec![node(1, "a", None, 3), node(2, "x", Some("a"), 2)],
            vec![],
        )
        .unwrap_err();
        assert!(matches!(err, TreeError::ChildSumMismatch { .. }));

        let err = GenealogyTree::new(
            levels.clone(),
            vec![node(1, "a", None, 3), node(2, "x", Some("b"), 3)],
            vec![],
        )
        .unwrap_err();
        assert!(matches!(err, TreeError::UnknownParent { .. }));

        let err = GenealogyTree::new(levels, vec![node(1, "a", None, 3)], vec![]).unwrap_err();
        assert!(matches!(err, TreeError::CountMismatch { level: 2, found: 0, .. }));
    }

    #[test]
    fn function_weights_normalized() {
        let levels = LevelScheme::Shah.levels()[..1].to_vec();
        let mut nodes = vec![node(1, "a", None, 2)];
        let mut second = node(1, "a", None, 1);
        second.function = 1;
        let mut third = node(1, "b", None, 1);
        third.function = 1;
        nodes.push(second);
        nodes.push(third);
        let tree = GenealogyTree::new(levels.clone(), nodes.clone(), vec![3.0, 1.0]).unwrap();
        assert_eq!(tree.function_weights(), &[0.75, 0.25]);
        let uniform = GenealogyTree::new(levels.clone(), nodes.clone(), vec![]).unwrap();
        assert_eq!(uniform.function_weights(), &[0.5, 0.5]);
        assert!(GenealogyTree::new(levels, nodes, vec![1.0]).is_err());
    }
}
