//! Embedding providers: anything that turns construct texts into vectors.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::DistanceError;
use crate::concept::AbstractionLevel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingVector {
    pub values: Vec<f64>,
    pub provider_id: String,
}

impl EmbeddingVector {
    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// What a provider is asked to encode. Text-based providers read `text`;
/// lookup-based providers key on `(concept_id, level)`.
#[derive(Debug, Clone, Copy)]
pub struct EmbedItem<'a> {
    pub concept_id: u32,
    pub level: AbstractionLevel,
    pub text: &'a str,
}

/// Maps a batch of texts to vectors, one per item and in order. Must be
/// deterministic: the same text under the same configuration yields the
/// same vector.
pub trait EmbeddingProvider: Send + Sync {
    fn provider_id(&self) -> String;

    fn embed_batch(&self, items: &[EmbedItem<'_>]) -> Result<Vec<EmbeddingVector>, DistanceError>;
}

impl<P: EmbeddingProvider + ?Sized> EmbeddingProvider for &P {
    fn provider_id(&self) -> String {
        (**self).provider_id()
    }

    fn embed_batch(&self, items: &[EmbedItem<'_>]) -> Result<Vec<EmbeddingVector>, DistanceError> {
        (**self).embed_batch(items)
    }
}

impl<P: EmbeddingProvider + ?Sized> EmbeddingProvider for Box<P> {
    fn provider_id(&self) -> String {
        (**self).provider_id()
    }

    fn embed_batch(&self, items: &[EmbedItem<'_>]) -> Result<Vec<EmbeddingVector>, DistanceError> {
        (**self).embed_batch(items)
    }
}

pub const HASHED_DIMENSION: usize = 384;
const HASH_SEED: u64 = 0x5a17_ba5e_d00d_f00d;

/// Offline bag-of-words encoder. Lowercases, splits on non-alphanumerics,
/// hashes each token into one of `dimension` buckets (FNV-1a, fixed seed),
/// counts term frequencies and L2-normalizes.
#[derive(Debug, Clone)]
pub struct HashedBagOfWords {
    dimension: usize,
}

impl HashedBagOfWords {
    pub fn new(dimension: usize) -> Self {
        assert!(dimension > 0, "dimension must be positive");
        Self { dimension }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn tokens(text: &str) -> impl Iterator<Item = String> + '_ {
        text.split(|c: char| !c.is_alphanumeric())
            .filter(|t| !t.is_empty())
            .map(str::to_lowercase)
    }

    pub fn bucket(&self, token: &str) -> usize {
        (fnv1a(token.as_bytes()) % self.dimension as u64) as usize
    }

    pub fn encode(&self, text: &str) -> Vec<f64> {
        let mut values = vec![0.0; self.dimension];
        for token in Self::tokens(text) {
            values[self.bucket(&token)] += 1.0;
        }
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            values.iter_mut().for_each(|v| *v /= norm);
        }
        values
    }
}

impl Default for HashedBagOfWords {
    fn default() -> Self {
        Self::new(HASHED_DIMENSION)
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut hash = 0xcbf2_9ce4_8422_2325_u64 ^ HASH_SEED;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(PRIME);
    }
    hash
}

impl EmbeddingProvider for HashedBagOfWords {
    fn provider_id(&self) -> String {
        format!("hash-bow-{}", self.dimension)
    }

    fn embed_batch(&self, items: &[EmbedItem<'_>]) -> Result<Vec<EmbeddingVector>, DistanceError> {
        let provider_id = self.provider_id();
        Ok(items
            .iter()
            .map(|item| EmbeddingVector {
                values: self.encode(item.text),
                provider_id: provider_id.clone(),
            })
            .collect())
    }
}

/// Vectors computed elsewhere, looked up by `(concept_id, level)`.
#[derive(Debug, Clone, Default)]
pub struct PrecomputedVectors {
    id: String,
    dimension: Option<usize>,
    vectors: HashMap<(u32, AbstractionLevel), Vec<f64>>,
}

impl PrecomputedVectors {
    pub fn new(id: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            ..Self::default()
        }
    }

    pub fn insert(
        &mut self,
        concept_id: u32,
        level: AbstractionLevel,
        values: Vec<f64>,
    ) -> Result<(), DistanceError> {
        match self.dimension {
            Some(d) if d != values.len() => {
                return Err(DistanceError::DimensionMismatch {
                    left: d,
                    right: values.len(),
                })
            }
            _ => self.dimension = Some(values.len()),
        }
        self.vectors.insert((concept_id, level), values);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn dimension(&self) -> Option<usize> {
        self.dimension
    }
}

impl EmbeddingProvider for PrecomputedVectors {
    fn provider_id(&self) -> String {
        format!("precomputed:{}", self.id)
    }

    fn embed_batch(&self, items: &[EmbedItem<'_>]) -> Result<Vec<EmbeddingVector>, DistanceError> {
        let provider_id = self.provider_id();
        items
            .iter()
            .map(|item| {
                self.vectors
                    .get(&(item.concept_id, item.level))
                    .map(|values| EmbeddingVector {
                        values: values.clone(),
                        provider_id: provider_id.clone(),
                    })
                    .ok_or(DistanceError::MissingPrecomputedVector {
                        concept_id: item.concept_id,
                        level: item.level,
                    })
            })
            .collect()
    }
}
