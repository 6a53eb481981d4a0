//! Partitioning concepts by pairwise distance.
//!
//! The default is k-medoids (BUILD by farthest-first from concept 0, then
//! PAM swaps) working directly on the distance matrix. The alternative embeds
//! the matrix with classical MDS and runs Lloyd's k-means on the coordinates.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::distance::DistanceMatrix;

const MAX_ITERATIONS: usize = 200;
const IMPROVEMENT_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClusterMethod {
    #[default]
    Medoids,
    MdsKmeans,
}

impl std::str::FromStr for ClusterMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "medoids" | "pam" | "k-medoids" => Ok(ClusterMethod::Medoids),
            "mds-kmeans" | "kmeans" => Ok(ClusterMethod::MdsKmeans),
            other => Err(format!("unknown cluster method {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterResult {
    pub k: usize,
    pub method: ClusterMethod,
    /// Cluster label per concept, numbered in order of first appearance.
    pub labels: Vec<usize>,
    /// Medoid concept index per label (medoid method only).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub medoids: Vec<usize>,
    /// Sum of distances from each concept to its medoid, or of squared
    /// coordinate distances to the centroid for the MDS method.
    pub cost: f64,
}

pub fn cluster(d: &DistanceMatrix, k: usize) -> Result<ClusterResult, AnalysisError> {
    cluster_with(d, k, ClusterMethod::Medoids)
}

pub fn cluster_with(
    d: &DistanceMatrix,
    k: usize,
    method: ClusterMethod,
) -> Result<ClusterResult, AnalysisError> {
    let n = d.n();
    if k < 1 || k > n {
        return Err(AnalysisError::BadK { k, n });
    }
    match method {
        ClusterMethod::Medoids => Ok(k_medoids(d, k)),
        ClusterMethod::MdsKmeans => Ok(mds_kmeans(d, k)),
    }
}

/// Farthest-first selection: start at index 0, then repeatedly add the point
/// farthest from its nearest chosen point (lowest index on ties).
fn farthest_first(n: usize, k: usize, dist: impl Fn(usize, usize) -> f64) -> Vec<usize> {
    let mut chosen = vec![0];
    let mut nearest: Vec<f64> = (0..n).map(|i| dist(i, 0)).collect();
    while chosen.len() < k {
        let mut best: Option<(usize, f64)> = None;
        for (i, &d) in nearest.iter().enumerate() {
            if chosen.contains(&i) {
                continue;
            }
            if best.is_none_or(|(_, bd)| d > bd) {
                best = Some((i, d));
            }
        }
        let (next, _) = best.expect("k <= n leaves a candidate");
        chosen.push(next);
        for (i, near) in nearest.iter_mut().enumerate() {
            *near = near.min(dist(i, next));
        }
    }
    chosen
}

fn assign(d: &DistanceMatrix, medoids: &[usize]) -> (Vec<usize>, f64) {
    let mut cost = 0.0;
    let labels = (0..d.n())
        .map(|i| {
            let (best, dist) = medoids
                .iter()
                .enumerate()
                .map(|(m, &med)| (m, d.get(i, med)))
                .fold((0, f64::INFINITY), |acc, cur| if cur.1 < acc.1 { cur } else { acc });
            cost += dist;
            best
        })
        .collect();
    (labels, cost)
}

fn k_medoids(d: &DistanceMatrix, k: usize) -> ClusterResult {
    let n = d.n();
    let mut medoids = farthest_first(n, k, |i, j| d.get(i, j));
    let (_, mut cost) = assign(d, &medoids);
    for _ in 0..MAX_ITERATIONS {
        let mut best: Option<(usize, usize, f64)> = None;
        for slot in 0..k {
            for candidate in 0..n {
                if medoids.contains(&candidate) {
                    continue;
                }
                let mut trial = medoids.clone();
                trial[slot] = candidate;
                let (_, trial_cost) = assign(d, &trial);
                if trial_cost < cost - IMPROVEMENT_EPS
                    && best.is_none_or(|(_, _, c)| trial_cost < c)
                {
                    best = Some((slot, candidate, trial_cost));
                }
            }
        }
        match best {
            Some((slot, candidate, new_cost)) => {
                medoids[slot] = candidate;
                cost = new_cost;
            }
            None => break,
        }
    }
    let (labels, cost) = assign(d, &medoids);
    let (labels, order) = canonical_labels(&labels);
    let medoids = order.into_iter().map(|old| medoids[old]).collect();
    ClusterResult {
        k,
        method: ClusterMethod::Medoids,
        labels,
        medoids,
        cost,
    }
}

/// Renumbers labels by first appearance; also returns new → old mapping.
fn canonical_labels(labels: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let mut order: Vec<usize> = Vec::new();
    let relabeled = labels
        .iter()
        .map(|l| match order.iter().position(|o| o == l) {
            Some(p) => p,
            None => {
                order.push(*l);
                order.len() - 1
            }
        })
        .collect();
    (relabeled, order)
}

/// Classical multidimensional scaling of a distance matrix. Rows are points;
/// only dimensions with positive eigenvalues are kept.
pub fn classical_mds(d: &DistanceMatrix) -> Vec<Vec<f64>> {
    let n = d.n();
    if n == 0 {
        return Vec::new();
    }
    let sq = DMatrix::from_fn(n, n, |i, j| d.get(i, j).powi(2));
    let row_means: Vec<f64> = (0..n).map(|i| sq.row(i).sum() / n as f64).collect();
    let grand = row_means.iter().sum::<f64>() / n as f64;
    let b = DMatrix::from_fn(n, n, |i, j| -0.5 * (sq[(i, j)] - row_means[i] - row_means[j] + grand));
    let eig = SymmetricEigen::new(b);
    let mut dims: Vec<usize> = (0..n).filter(|&c| eig.eigenvalues[c] > 1e-12).collect();
    dims.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    (0..n)
        .map(|i| {
            dims.iter()
                .map(|&c| eig.eigenvectors[(i, c)] * eig.eigenvalues[c].sqrt())
                .collect()
        })
        .collect()
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

fn mds_kmeans(d: &DistanceMatrix, k: usize) -> ClusterResult {
    let points = classical_mds(d);
    let n = points.len();
    let seeds = farthest_first(n, k, |i, j| sq_dist(&points[i], &points[j]));
    let mut centroids: Vec<Vec<f64>> = seeds.iter().map(|&s| points[s].clone()).collect();
    let nearest = |p: &[f64], cs: &[Vec<f64>]| {
        cs.iter()
            .enumerate()
            .map(|(c, centroid)| (c, sq_dist(p, centroid)))
            .fold((0, f64::INFINITY), |acc, cur| if cur.1 < acc.1 { cur } else { acc })
    };
    let mut labels: Vec<usize> = points.iter().map(|p| nearest(p, &centroids).0).collect();
    for _ in 0..MAX_ITERATIONS {
        for (c, centroid) in centroids.iter_mut().enumerate() {
            let members: Vec<&Vec<f64>> = points
                .iter()
                .zip(&labels)
                .filter(|(_, &l)| l == c)
                .map(|(p, _)| p)
                .collect();
            if members.is_empty() {
                continue;
            }
            for (dim, value) in centroid.iter_mut().enumerate() {
                *value = members.iter().map(|m| m[dim]).sum::<f64>() / members.len() as f64;
            }
        }
        let next: Vec<usize> = points.iter().map(|p| nearest(p, &centroids).0).collect();
        if next == labels {
            break;
        }
        labels = next;
    }
    let cost = points
        .iter()
        .zip(&labels)
        .map(|(p, &l)| sq_dist(p, &centroids[l]))
        .sum();
    let (labels, _) = canonical_labels(&labels);
    ClusterResult {
        k,
        method: ClusterMethod::MdsKmeans,
        labels,
        medoids: Vec::new(),
        cost,
    }
}
