//! End-to-end assessment of a concept space: texts → matrices → RQID scores.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::analysis::{level_boxplot, AnalysisError, BoxPlotStats};
use crate::concept::{validate_space, AbstractionLevel, ConceptSpace, LevelWeights};
use crate::distance::{build_level_matrices, DistanceError, DistanceMatrix, EmbeddingProvider, MatrixOptions};
use crate::rqid::{
    concept_variety, level_variety, space_variety, weighted_concept_variety,
    weighted_distance_matrix, RqidError,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AssessError {
    #[error("invalid concept space: {0}")]
    InvalidSpace(String),
    #[error("assessment needs at least 2 concepts, got {0}")]
    TooFewConcepts(usize),
    #[error(transparent)]
    Distance(#[from] DistanceError),
    #[error(transparent)]
    Rqid(#[from] RqidError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConceptScore {
    pub concept_id: u32,
    pub name: String,
    pub score: f64,
}

/// V_i^α for one concept across the levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConceptLevelScores {
    pub concept_id: u32,
    pub scores: BTreeMap<AbstractionLevel, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssessmentResult {
    pub provider_id: String,
    pub weights_used: LevelWeights,
    /// V(C)
    pub overall: f64,
    /// V^α(C)
    pub per_level: BTreeMap<AbstractionLevel, f64>,
    /// V(C_i), in concept order.
    pub per_concept: Vec<ConceptScore>,
    pub per_concept_per_level: Vec<ConceptLevelScores>,
    pub level_matrices: Vec<DistanceMatrix>,
    /// D
    pub weighted_matrix: DistanceMatrix,
    pub level_boxplots: Vec<BoxPlotStats>,
}

impl AssessmentResult {
    pub fn concept_ids(&self) -> Vec<u32> {
        self.per_concept.iter().map(|c| c.concept_id).collect()
    }

    /// Concept with the highest V(C_i); the first one on ties.
    pub fn most_varied(&self) -> Option<&ConceptScore> {
        self.per_concept
            .iter()
            .fold(None, |best: Option<&ConceptScore>, c| match best {
                Some(b) if b.score >= c.score => Some(b),
                _ => Some(c),
            })
    }
}

/// Runs the full pipeline with the given provider. The space must pass
/// validation (warnings allowed) and hold at least two concepts.
pub fn assess<P: EmbeddingProvider + ?Sized>(
    space: &ConceptSpace,
    provider: &P,
    weights: &LevelWeights,
    options: &MatrixOptions,
) -> Result<AssessmentResult, AssessError> {
    let report = validate_space(space);
    if let Some(first) = report.errors().next() {
        return Err(AssessError::InvalidSpace(first.message.clone()));
    }
    if space.len() < 2 {
        return Err(AssessError::TooFewConcepts(space.len()));
    }
    let matrices = build_level_matrices(space, provider, options)?;
    let names: Vec<(u32, String)> = space
        .concepts
        .iter()
        .map(|c| (c.concept_id, c.name.clone()))
        .collect();
    assess_matrices(&names, matrices, weights, provider.provider_id())
}

/// Scores precomputed per-level matrices. `concepts` gives (id, name) in
/// matrix order; `matrices` carry level labels.
pub fn assess_matrices(
    concepts: &[(u32, String)],
    matrices: Vec<DistanceMatrix>,
    weights: &LevelWeights,
    provider_id: String,
) -> Result<AssessmentResult, AssessError> {
    let n = concepts.len();
    if n < 2 {
        return Err(AssessError::TooFewConcepts(n));
    }
    let weighted_matrix = weighted_distance_matrix(&matrices, weights)?;
    let levels: Vec<AbstractionLevel> = matrices
        .iter()
        .filter_map(|m| match m.label() {
            crate::distance::MatrixLabel::Level(l) => Some(l),
            _ => None,
        })
        .collect();

    let mut per_level = BTreeMap::new();
    for (m, &level) in matrices.iter().zip(&levels) {
        if m.n() != n {
            return Err(RqidError::ShapeMismatch(format!("{} concepts but {level} matrix is {}x{}", n, m.n(), m.n())).into());
        }
        per_level.insert(level, level_variety(m)?);
    }

    let mut per_concept = Vec::with_capacity(n);
    let mut per_concept_per_level = Vec::with_capacity(n);
    for (i, (concept_id, name)) in concepts.iter().enumerate() {
        let scores: Vec<(AbstractionLevel, f64)> = matrices
            .iter()
            .zip(&levels)
            .map(|(m, &level)| Ok((level, concept_variety(m, i)?)))
            .collect::<Result<_, RqidError>>()?;
        per_concept.push(ConceptScore {
            concept_id: *concept_id,
            name: name.clone(),
            score: weighted_concept_variety(&scores, weights)?,
        });
        per_concept_per_level.push(ConceptLevelScores {
            concept_id: *concept_id,
            scores: scores.into_iter().collect(),
        });
    }

    let level_scores: Vec<(AbstractionLevel, f64)> = per_level.iter().map(|(&l, &v)| (l, v)).collect();
    let overall = space_variety(&level_scores, weights)?;
    let level_boxplots = level_boxplot(&per_concept_per_level)?;

    Ok(AssessmentResult {
        provider_id,
        weights_used: *weights,
        overall,
        per_level,
        per_concept,
        per_concept_per_level,
        level_matrices: matrices,
        weighted_matrix,
        level_boxplots,
    })
}
