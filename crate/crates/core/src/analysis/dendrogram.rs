//! Average-linkage (UPGMA) agglomerative clustering.

use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::distance::DistanceMatrix;

/// One merge step. Node ids `0..N` are leaves (concept indices); the merge
/// at step `s` creates node `N + s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    /// Concept ids of the leaves, by leaf index.
    pub leaves: Vec<u32>,
    pub merges: Vec<Merge>,
    /// Leaf indices in drawing order (left subtree first).
    pub leaf_order: Vec<usize>,
}

impl Dendrogram {
    pub fn heights(&self) -> impl Iterator<Item = f64> + '_ {
        self.merges.iter().map(|m| m.height)
    }

    /// Flat clusters from cutting the tree into `k` groups, numbered by first appearance.
    pub fn cut(&self, k: usize) -> Vec<usize> {
        let n = self.leaves.len();
        let mut parent: Vec<usize> = (0..n + self.merges.len()).collect();
        fn root(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        let steps = n.saturating_sub(k.max(1));
        for (s, m) in self.merges.iter().take(steps).enumerate() {
            let node = n + s;
            let (a, b) = (root(&mut parent, m.left), root(&mut parent, m.right));
            parent[a] = node;
            parent[b] = node;
        }
        let mut seen: Vec<usize> = Vec::new();
        (0..n)
            .map(|i| {
                let r = root(&mut parent, i);
                seen.iter().position(|&x| x == r).unwrap_or_else(|| {
                    seen.push(r);
                    seen.len() - 1
                })
            })
            .collect()
    }
}

/// Builds the dendrogram. At each step the closest pair of clusters merges;
/// ties go to the pair whose smallest member indices are lowest.
pub fn dendrogram(d: &DistanceMatrix, concept_ids: &[u32]) -> Result<Dendrogram, AnalysisError> {
    let n = d.n();
    if n < 2 {
        return Err(AnalysisError::TooFewConcepts(n));
    }
    if concept_ids.len() != n {
        return Err(AnalysisError::LengthMismatch {
            expected: n,
            got: concept_ids.len(),
        });
    }

    struct Cluster {
        node: usize,
        key: usize,
        size: usize,
    }
    let mut active: Vec<Cluster> = (0..n).map(|i| Cluster { node: i, key: i, size: 1 }).collect();
    // distances between active clusters, indexed by position in `active`
    let mut dist: Vec<Vec<f64>> = (0..n).map(|i| d.row(i).to_vec()).collect();
    let mut merges = Vec::with_capacity(n - 1);
    let mut children: Vec<(usize, usize)> = Vec::with_capacity(n - 1);
    let mut last_height = 0.0_f64;

    while active.len() > 1 {
        let mut best: Option<(usize, usize, f64, (usize, usize))> = None;
        for a in 0..active.len() {
            for b in (a + 1)..active.len() {
                let h = dist[a][b];
                let keys = {
                    let (x, y) = (active[a].key, active[b].key);
                    (x.min(y), x.max(y))
                };
                let better = match best {
                    None => true,
                    Some((_, _, bh, bk)) => h < bh || (h == bh && keys < bk),
                };
                if better {
                    best = Some((a, b, h, keys));
                }
            }
        }
        let (a, b, h, _) = best.expect("at least two clusters");
        let (a, b) = if active[a].key <= active[b].key { (a, b) } else { (b, a) };
        let (sa, sb) = (active[a].size as f64, active[b].size as f64);
        // UPGMA is monotone; the max only absorbs rounding.
        let height = h.max(last_height);
        last_height = height;
        let node = n + merges.len();
        merges.push(Merge {
            left: active[a].node,
            right: active[b].node,
            height,
            size: active[a].size + active[b].size,
        });
        children.push((active[a].node, active[b].node));

        let merged: Vec<f64> = (0..active.len())
            .map(|c| (sa * dist[a][c] + sb * dist[b][c]) / (sa + sb))
            .collect();
        let keep = a.min(b);
        let drop = a.max(b);
        active[keep] = Cluster {
            node,
            key: active[a].key.min(active[b].key),
            size: active[a].size + active[b].size,
        };
        for c in 0..active.len() {
            if c != keep {
                dist[keep][c] = merged[c];
                dist[c][keep] = merged[c];
            }
        }
        dist[keep][keep] = 0.0;
        active.remove(drop);
        dist.remove(drop);
        for row in &mut dist {
            row.remove(drop);
        }
    }

    let mut leaf_order = Vec::with_capacity(n);
    let mut stack = vec![n + merges.len() - 1];
    while let Some(node) = stack.pop() {
        if node < n {
            leaf_order.push(node);
        } else {
            let (l, r) = children[node - n];
            stack.push(r);
            stack.push(l);
        }
    }

    Ok(Dendrogram {
        leaves: concept_ids.to_vec(),
        merges,
        leaf_order,
    })
}
