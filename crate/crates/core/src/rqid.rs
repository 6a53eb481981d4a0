//! Rao's quadratic index for design (RQID) over per-level distance matrices,
//! and its weighted aggregates across the SAPPhIRE levels.

use crate::concept::{AbstractionLevel, LevelWeights};
use crate::distance::{DistanceMatrix, MatrixLabel};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RqidError {
    #[error("RQID needs at least 2 concepts, got {0}")]
    TooFewConcepts(usize),
    #[error("concept index {index} out of range for N = {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("weights of the scored levels sum to zero")]
    ZeroWeightSum,
    #[error("matrix shapes differ: {0}")]
    ShapeMismatch(String),
}

fn require_pairs(d: &DistanceMatrix) -> Result<usize, RqidError> {
    let n = d.n();
    if n < 2 {
        return Err(RqidError::TooFewConcepts(n));
    }
    Ok(n)
}

/// V_i^α: mean distance of concept `i` to the other N − 1 concepts.
pub fn concept_variety(d: &DistanceMatrix, i: usize) -> Result<f64, RqidError> {
    let n = require_pairs(d)?;
    if i >= n {
        return Err(RqidError::IndexOutOfRange { index: i, n });
    }
    Ok(d.row(i).iter().sum::<f64>() / (n - 1) as f64)
}

/// V^α(C) = Σ_{i,j} d_ij / (N (N − 1)).
pub fn level_variety(d: &DistanceMatrix) -> Result<f64, RqidError> {
    let n = require_pairs(d)?;
    Ok(d.off_diagonal_sum() / (n * (n - 1)) as f64)
}

fn weighted_mean(scores: &[(AbstractionLevel, f64)], weights: &LevelWeights) -> Result<f64, RqidError> {
    let (num, den) = scores.iter().fold((0.0, 0.0), |(num, den), &(level, v)| {
        let w = weights.get(level);
        (num + w * v, den + w)
    });
    if den <= 0.0 {
        return Err(RqidError::ZeroWeightSum);
    }
    Ok(num / den)
}

/// V(C_i) = Σ w_α V_i^α / Σ w_α over the scored levels. Zero-weight levels
/// drop out of both sums.
pub fn weighted_concept_variety(
    per_level: &[(AbstractionLevel, f64)],
    weights: &LevelWeights,
) -> Result<f64, RqidError> {
    weighted_mean(per_level, weights)
}

/// V(C) = Σ w_α V^α(C) / Σ w_α.
pub fn space_variety(
    per_level: &[(AbstractionLevel, f64)],
    weights: &LevelWeights,
) -> Result<f64, RqidError> {
    weighted_mean(per_level, weights)
}

/// D_ij = Σ w_α d_ij^α / Σ w_α. Matrices must carry level labels.
pub fn weighted_distance_matrix(
    matrices: &[DistanceMatrix],
    weights: &LevelWeights,
) -> Result<DistanceMatrix, RqidError> {
    let first = matrices
        .first()
        .ok_or_else(|| RqidError::ShapeMismatch("no matrices".into()))?;
    let n = first.n();
    let mut levels = Vec::with_capacity(matrices.len());
    for m in matrices {
        if m.n() != n {
            return Err(RqidError::ShapeMismatch(format!(
                "{} is {}x{}, expected {n}x{n}",
                m.label(),
                m.n(),
                m.n()
            )));
        }
        match m.label() {
            MatrixLabel::Level(level) => levels.push(level),
            MatrixLabel::Weighted(_) => {
                return Err(RqidError::ShapeMismatch(
                    "weighted matrix passed as a level matrix".into(),
                ))
            }
        }
    }
    let total: f64 = levels.iter().map(|&l| weights.get(l)).sum();
    if total <= 0.0 {
        return Err(RqidError::ZeroWeightSum);
    }
    let matrix = DistanceMatrix::from_upper(MatrixLabel::WEIGHTED, n, |i, j| {
        matrices
            .iter()
            .zip(&levels)
            .map(|(m, &l)| weights.get(l) * m.get(i, j))
            .sum::<f64>()
            / total
    })
    .expect("weighted mean of valid distances is a valid distance");
    Ok(matrix)
}
