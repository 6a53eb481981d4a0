use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::assessment::ConceptLevelScores;
use crate::concept::AbstractionLevel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outlier {
    pub concept_id: u32,
    pub value: f64,
}

/// Tukey box-plot summary of the V_i^α scores at one level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxPlotStats {
    pub level: AbstractionLevel,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub whisker_low: f64,
    pub whisker_high: f64,
    /// Mean of the per-concept scores, i.e. V^α.
    pub mean: f64,
    pub outliers: Vec<Outlier>,
}

/// Quantile by linear interpolation between order statistics. `sorted` must be non-empty.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Box-plot statistics for `(concept_id, value)` samples at one level.
pub fn boxplot(level: AbstractionLevel, samples: &[(u32, f64)]) -> Result<BoxPlotStats, AnalysisError> {
    if samples.is_empty() {
        return Err(AnalysisError::TooFewConcepts(0));
    }
    let mut sorted: Vec<f64> = samples.iter().map(|s| s.1).collect();
    sorted.sort_by(f64::total_cmp);
    let q1 = quantile(&sorted, 0.25);
    let median = quantile(&sorted, 0.5);
    let q3 = quantile(&sorted, 0.75);
    let iqr = q3 - q1;
    let (low_fence, high_fence) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
    let inside = sorted.iter().copied().filter(|v| (low_fence..=high_fence).contains(v));
    let whisker_low = inside.clone().fold(f64::INFINITY, f64::min);
    let whisker_high = inside.fold(f64::NEG_INFINITY, f64::max);
    let outliers = samples
        .iter()
        .filter(|(_, v)| *v < low_fence || *v > high_fence)
        .map(|&(concept_id, value)| Outlier { concept_id, value })
        .collect();
    Ok(BoxPlotStats {
        level,
        q1,
        median,
        q3,
        whisker_low,
        whisker_high,
        mean: sorted.iter().sum::<f64>() / sorted.len() as f64,
        outliers,
    })
}

/// One box plot per SAPPhIRE level.
pub fn level_boxplot(per_concept: &[ConceptLevelScores]) -> Result<Vec<BoxPlotStats>, AnalysisError> {
    if per_concept.len() < 2 {
        return Err(AnalysisError::TooFewConcepts(per_concept.len()));
    }
    AbstractionLevel::ALL
        .into_iter()
        .map(|level| {
            let samples: Vec<(u32, f64)> = per_concept
                .iter()
                .map(|c| (c.concept_id, c.scores.get(&level).copied().unwrap_or(0.0)))
                .collect();
            boxplot(level, &samples)
        })
        .collect()
}
