use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::AbstractionLevel;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WeightError {
    #[error("weight for {level} must be a finite non-negative number, got {value}")]
    Invalid { level: AbstractionLevel, value: f64 },
    #[error("level weights sum to zero")]
    ZeroSum,
    #[error("expected 7 level weights, got {0}")]
    WrongLength(usize),
}

/// Weight w_α per SAPPhIRE level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<AbstractionLevel, f64>", into = "BTreeMap<AbstractionLevel, f64>")]
pub struct LevelWeights([f64; 7]);

impl LevelWeights {
    pub fn new(weights: [f64; 7]) -> Result<Self, WeightError> {
        for (level, &value) in AbstractionLevel::ALL.iter().zip(&weights) {
            if !value.is_finite() || value < 0.0 {
                return Err(WeightError::Invalid {
                    level: *level,
                    value,
                });
            }
        }
        if weights.iter().sum::<f64>() <= 0.0 {
            return Err(WeightError::ZeroSum);
        }
        Ok(Self(weights))
    }

    pub fn from_slice(weights: &[f64]) -> Result<Self, WeightError> {
        let arr: [f64; 7] = weights
            .try_into()
            .map_err(|_| WeightError::WrongLength(weights.len()))?;
        Self::new(arr)
    }

    /// Parts = 1, oRgans = 2, ..., Actions = 7.
    pub fn paper_default() -> Self {
        Self([1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0])
    }

    pub fn uniform() -> Self {
        Self([1.0; 7])
    }

    pub fn get(&self, level: AbstractionLevel) -> f64 {
        self.0[level.slot()]
    }

    pub fn as_array(&self) -> &[f64; 7] {
        &self.0
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn scaled(&self, factor: f64) -> Result<Self, WeightError> {
        Self::new(self.0.map(|w| w * factor))
    }
}

impl Default for LevelWeights {
    fn default() -> Self {
        Self::paper_default()
    }
}

impl TryFrom<BTreeMap<AbstractionLevel, f64>> for LevelWeights {
    type Error = WeightError;

    /// Levels absent from the map get weight 0.
    fn try_from(map: BTreeMap<AbstractionLevel, f64>) -> Result<Self, Self::Error> {
        let mut weights = [0.0; 7];
        for (level, w) in map {
            weights[level.slot()] = w;
        }
        Self::new(weights)
    }
}

impl From<LevelWeights> for BTreeMap<AbstractionLevel, f64> {
    fn from(w: LevelWeights) -> Self {
        AbstractionLevel::ALL.into_iter().map(|l| (l, w.get(l))).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_weights_follow_level_index() {
        let w = LevelWeights::paper_default();
        for level in AbstractionLevel::ALL {
            assert_eq!(w.get(level), f64::from(level.index()));
        }
        assert_eq!(w.get(AbstractionLevel::Action), 7.0);
        assert_eq!(w.get(AbstractionLevel::Part), 1.0);
        assert_eq!(w.sum(), 28.0);
    }

    #[test]
    fn rejects_bad_weights() {
        assert_eq!(LevelWeights::new([0.0; 7]), Err(WeightError::ZeroSum));
        assert!(matches!(
            LevelWeights::new([1.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
            Err(WeightError::Invalid { level: AbstractionLevel::Organ, .. })
        ));
        assert!(LevelWeights::new([f64::NAN, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0]).is_err());
        assert_eq!(LevelWeights::from_slice(&[1.0; 3]), Err(WeightError::WrongLength(3)));
    }

    #[test]
    fn map_form_fills_missing_levels_with_zero() {
        let mut map = BTreeMap::new();
        map.insert(AbstractionLevel::Action, 2.0);
        let w = LevelWeights::try_from(map).unwrap();
        assert_eq!(w.get(AbstractionLevel::Action), 2.0);
        assert_eq!(w.get(AbstractionLevel::Part), 0.0);
    }
}
