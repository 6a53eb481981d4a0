//! The result document shared by the CLI and the HTTP API.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use variety_core::analysis::{cluster_with, dendrogram, AnalysisError, BoxPlotStats, ClusterMethod, Dendrogram};
use variety_core::assessment::{ConceptLevelScores, ConceptScore};
use variety_core::concept::{AbstractionLevel, ConceptSpace, LevelWeights};
use variety_core::distance::{DistanceError, DistanceMatrix, MatrixOptions};
use variety_core::{assess, AssessError, AssessmentResult};

use crate::config::{ConfigError, RunConfig};
use crate::provider::{build_provider, ProviderError};

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Provider(#[from] ProviderError),
    #[error(transparent)]
    Assess(#[from] AssessError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

impl EngineError {
    /// True when the embedding provider, not the input, is at fault.
    pub fn is_provider_failure(&self) -> bool {
        let distance = match self {
            EngineError::Provider(ProviderError::Distance(e)) => e,
            EngineError::Assess(AssessError::Distance(e)) => e,
            _ => return false,
        };
        matches!(
            distance,
            DistanceError::ProviderUnavailable(_)
                | DistanceError::InvalidResponse(_)
                | DistanceError::ZeroVector
                | DistanceError::DimensionMismatch { .. }
        )
    }
}

/// Labels of a k-way partition, aligned with `concept_ids`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSection {
    pub k: usize,
    pub method: ClusterMethod,
    pub concept_ids: Vec<u32>,
    pub labels: Vec<usize>,
    /// Concept id of each cluster's medoid (empty for k-means).
    pub medoids: Vec<u32>,
    pub cost: f64,
}

/// Data behind the charts, so clients never recompute statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotData {
    pub level_boxplots: Vec<BoxPlotStats>,
    /// Concept ids in dendrogram leaf order, for heat-map axes.
    pub heatmap_order: Vec<u32>,
    pub level_names: BTreeMap<AbstractionLevel, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    /// V(C) at full precision.
    pub overall: f64,
    /// V(C) rounded to three decimals for display.
    pub overall_display: f64,
    pub per_level: BTreeMap<AbstractionLevel, f64>,
    pub per_concept: Vec<ConceptScore>,
    pub per_concept_per_level: Vec<ConceptLevelScores>,
    pub weighted_matrix: DistanceMatrix,
    pub level_matrices: Vec<DistanceMatrix>,
    pub most_varied: Option<ConceptScore>,
    pub space_id: String,
    pub provider_id: String,
    pub weights_used: LevelWeights,
    pub config: RunConfig,
    pub plot_data: PlotData,
    pub clusters: Option<ClusterSection>,
    pub dendrogram: Option<Dendrogram>,
}

fn round3(v: f64) -> f64 {
    (v * 1000.0).round() / 1000.0
}

impl ResultDocument {
    pub fn build(space_id: &str, result: AssessmentResult, config: RunConfig) -> Result<Self, EngineError> {
        let ids = result.concept_ids();
        let tree = dendrogram(&result.weighted_matrix, &ids)?;
        let mut doc = ResultDocument {
            overall: result.overall,
            overall_display: round3(result.overall),
            most_varied: result.most_varied().cloned(),
            per_level: result.per_level,
            per_concept: result.per_concept,
            per_concept_per_level: result.per_concept_per_level,
            weighted_matrix: result.weighted_matrix,
            level_matrices: result.level_matrices,
            space_id: space_id.to_string(),
            provider_id: result.provider_id,
            weights_used: result.weights_used,
            plot_data: PlotData {
                level_boxplots: result.level_boxplots,
                heatmap_order: tree.leaf_order.iter().map(|&i| ids[i]).collect(),
                level_names: AbstractionLevel::ALL
                    .iter()
                    .map(|&l| (l, l.display_name().to_string()))
                    .collect(),
            },
            dendrogram: Some(tree),
            clusters: None,
            config,
        };
        if let Some(k) = doc.config.k {
            doc.cluster(k, doc.config.cluster_method)?;
        }
        Ok(doc)
    }

    pub fn concept_ids(&self) -> Vec<u32> {
        self.per_concept.iter().map(|c| c.concept_id).collect()
    }

    /// Partitions the weighted matrix and stores the section.
    pub fn cluster(&mut self, k: usize, method: ClusterMethod) -> Result<&ClusterSection, EngineError> {
        let r = cluster_with(&self.weighted_matrix, k, method)?;
        let ids = self.concept_ids();
        self.clusters = Some(ClusterSection {
            k,
            method,
            medoids: r.medoids.iter().map(|&m| ids[m]).collect(),
            concept_ids: ids,
            labels: r.labels,
            cost: r.cost,
        });
        Ok(self.clusters.as_ref().expect("just set"))
    }
}

/// Import-independent pipeline: provider → matrices → scores → document.
pub fn assess_space(space: &ConceptSpace, config: &RunConfig) -> Result<ResultDocument, EngineError> {
    let weights = config.weights.resolve()?;
    let provider = build_provider(&config.provider)?;
    let options = MatrixOptions {
        separator: config.separator.clone(),
        max_in_flight: config.max_in_flight,
    };
    let result = assess(space, provider.as_ref(), &weights, &options)?;
    ResultDocument::build(&space.space_id, result, config.clone())
}
