//! From construct texts to per-level distance matrices.

mod embedding;
mod matrix;

pub use embedding::{
    EmbedItem, EmbeddingProvider, EmbeddingVector, HashedBagOfWords, PrecomputedVectors,
    HASHED_DIMENSION,
};
pub use matrix::{DistanceMatrix, MatrixError, MatrixLabel, WeightedTag};

use crate::concept::{AbstractionLevel, Concept, ConceptSpace};

/// Separator used to join the instance texts of a concept.
pub const DEFAULT_SEPARATOR: &str = ". ";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DistanceError {
    #[error("zero-norm embedding for non-empty text (provider failure?)")]
    ZeroVector,
    #[error("embedding dimensions differ: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("embedding provider unavailable: {0}")]
    ProviderUnavailable(String),
    #[error("embedding provider returned an invalid response: {0}")]
    InvalidResponse(String),
    #[error("no precomputed vector for concept {concept_id} at level {level}")]
    MissingPrecomputedVector {
        concept_id: u32,
        level: AbstractionLevel,
    },
    #[error("distance matrix needs at least 2 concepts, got {0}")]
    TooFewConcepts(usize),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// L_i^α: the concatenated construct texts of one concept at one level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelText {
    pub concept_id: u32,
    pub level: AbstractionLevel,
    pub text: String,
}

/// Joins the concept's instance texts at `level` in instance order, skipping
/// empty constructs.
pub fn concat_level_text(concept: &Concept, level: AbstractionLevel, separator: &str) -> LevelText {
    let text = concept
        .instances
        .iter()
        .map(|inst| inst.construct(level).trim())
        .filter(|t| !t.is_empty())
        .collect::<Vec<_>>()
        .join(separator);
    LevelText {
        concept_id: concept.concept_id,
        level,
        text,
    }
}

/// 1 − cos(a, b), with the similarity floored at 0 so the result stays in [0, 1].
/// Bit-identical vectors are at distance exactly 0.
pub fn cosine_distance(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f64, DistanceError> {
    if a.values.len() != b.values.len() {
        return Err(DistanceError::DimensionMismatch {
            left: a.values.len(),
            right: b.values.len(),
        });
    }
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 || nb == 0.0 {
        return Err(DistanceError::ZeroVector);
    }
    if a.values == b.values {
        return Ok(0.0);
    }
    let dot: f64 = a.values.iter().zip(&b.values).map(|(x, y)| x * y).sum();
    let similarity = (dot / (na * nb)).clamp(0.0, 1.0);
    Ok(1.0 - similarity)
}

/// Options for matrix assembly.
#[derive(Debug, Clone)]
pub struct MatrixOptions {
    pub separator: String,
    /// Upper bound on concurrent provider calls when building all levels.
    pub max_in_flight: usize,
}

impl Default for MatrixOptions {
    fn default() -> Self {
        Self {
            separator: DEFAULT_SEPARATOR.to_string(),
            max_in_flight: 4,
        }
    }
}

/// Pairwise distances between all concepts at one level.
///
/// Non-empty texts are embedded in a single batch. Empty texts are never
/// sent to the provider: two empty texts are at distance 0, an empty and a
/// non-empty text at distance 1.
pub fn build_level_matrix<P: EmbeddingProvider + ?Sized>(
    space: &ConceptSpace,
    level: AbstractionLevel,
    provider: &P,
    separator: &str,
) -> Result<DistanceMatrix, DistanceError> {
    let n = space.len();
    if n < 2 {
        return Err(DistanceError::TooFewConcepts(n));
    }
    let texts: Vec<LevelText> = space
        .concepts
        .iter()
        .map(|c| concat_level_text(c, level, separator))
        .collect();
    let items: Vec<EmbedItem<'_>> = texts
        .iter()
        .filter(|t| !t.text.is_empty())
        .map(|t| EmbedItem {
            concept_id: t.concept_id,
            level,
            text: &t.text,
        })
        .collect();
    let embedded = if items.is_empty() {
        Vec::new()
    } else {
        provider.embed_batch(&items)?
    };
    if embedded.len() != items.len() {
        return Err(DistanceError::InvalidResponse(format!(
            "{} vectors for {} texts",
            embedded.len(),
            items.len()
        )));
    }

    let mut vectors: Vec<Option<EmbeddingVector>> = vec![None; n];
    let mut embedded = embedded.into_iter();
    for (slot, t) in vectors.iter_mut().zip(&texts) {
        if !t.text.is_empty() {
            *slot = embedded.next();
        }
    }

    let mut failure = None;
    let matrix = DistanceMatrix::from_upper(MatrixLabel::Level(level), n, |i, j| {
        match (&vectors[i], &vectors[j]) {
            (None, None) => 0.0,
            (None, Some(_)) | (Some(_), None) => 1.0,
            (Some(a), Some(b)) => cosine_distance(a, b).unwrap_or_else(|e| {
                failure.get_or_insert(e);
                0.0
            }),
        }
    })?;
    match failure {
        Some(e) => Err(e),
        None => Ok(matrix),
    }
}

/// Builds the seven per-level matrices, in level order, issuing at most
/// `max_in_flight` provider batches at a time.
pub fn build_level_matrices<P: EmbeddingProvider + ?Sized>(
    space: &ConceptSpace,
    provider: &P,
    options: &MatrixOptions,
) -> Result<Vec<DistanceMatrix>, DistanceError> {
    let width = options.max_in_flight.max(1);
    let mut out = Vec::with_capacity(AbstractionLevel::ALL.len());
    for chunk in AbstractionLevel::ALL.chunks(width) {
        let results: Vec<Result<DistanceMatrix, DistanceError>> = if chunk.len() == 1 {
            vec![build_level_matrix(space, chunk[0], provider, &options.separator)]
        } else {
            std::thread::scope(|scope| {
                let handles: Vec<_> = chunk
                    .iter()
                    .map(|&level| {
                        scope.spawn(move || {
                            build_level_matrix(space, level, provider, &options.separator)
                        })
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("matrix worker panicked"))
                    .collect()
            })
        };
        for r in results {
            out.push(r?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concept::SapphireInstance;
    use approx::assert_abs_diff_eq;

    fn v(values: &[f64]) -> EmbeddingVector {
        EmbeddingVector {
            values: values.to_vec(),
            provider_id: "test".into(),
        }
    }

    fn concept(id: u32, actions: &[&str]) -> Concept {
        Concept {
            concept_id: id,
            name: format!("c{id}"),
            instances: actions
                .iter()
                .enumerate()
                .map(|(k, a)| {
                    let mut texts = [""; 7];
                    texts[AbstractionLevel::Action.slot()] = a;
                    SapphireInstance::new(k as u32 + 1, texts)
                })
                .collect(),
        }
    }

    fn space(concepts: Vec<Concept>) -> ConceptSpace {
        ConceptSpace {
            space_id: "s".into(),
            problem: String::new(),
            concepts,
        }
    }

    #[test]
    fn concatenation() {
        let c = concept(1, &["heating", "blowing"]);
        assert_eq!(
            concat_level_text(&c, AbstractionLevel::Action, DEFAULT_SEPARATOR).text,
            "heating. blowing"
        );
        assert_eq!(concat_level_text(&c, AbstractionLevel::Part, DEFAULT_SEPARATOR).text, "");
        let skip = concept(2, &["", "blowing"]);
        assert_eq!(concat_level_text(&skip, AbstractionLevel::Action, " | ").text, "blowing");
    }

    #[test]
    fn cosine_examples() {
        assert_eq!(cosine_distance(&v(&[0.3, 0.4]), &v(&[0.3, 0.4])).unwrap(), 0.0);
        assert_eq!(cosine_distance(&v(&[1.0, 0.0]), &v(&[0.0, 2.0])).unwrap(), 1.0);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(
            cosine_distance(&v(&[1.0, 0.0]), &v(&[s, s])).unwrap(),
            1.0 - s,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(1.0 - s, 0.2929, epsilon = 1e-4);
        // anti-parallel vectors are floored at distance 1
        assert_eq!(cosine_distance(&v(&[1.0, 0.0]), &v(&[-1.0, 0.0])).unwrap(), 1.0);
    }

    #[test]
    fn cosine_errors() {
        assert_eq!(
            cosine_distance(&v(&[0.0, 0.0]), &v(&[1.0, 0.0])),
            Err(DistanceError::ZeroVector)
        );
        assert_eq!(
            cosine_distance(&v(&[1.0]), &v(&[1.0, 0.0])),
            Err(DistanceError::DimensionMismatch { left: 1, right: 2 })
        );
    }

    #[test]
    fn identical_texts_give_zero_matrix() {
        let s = space((1..=4).map(|i| concept(i, &["Boiling of Water"])).collect());
        let m = build_level_matrix(&s, AbstractionLevel::Action, &HashedBagOfWords::default(), ". ").unwrap();
        assert!(m.rows().flatten().all(|&d| d == 0.0));
    }

    #[test]
    fn two_concepts_structure() {
        let s = space(vec![concept(1, &["boil water"]), concept(2, &["warm milk"])]);
        let m = build_level_matrix(&s, AbstractionLevel::Action, &HashedBagOfWords::default(), ". ").unwrap();
        assert_eq!(m.n(), 2);
        assert_eq!(m.get(0, 0), 0.0);
        assert_eq!(m.get(0, 1), m.get(1, 0));
        assert!(m.get(0, 1) > 0.0);
    }

    #[test]
    fn empty_text_policy() {
        let s = space(vec![concept(1, &[""]), concept(2, &[""]), concept(3, &["x"])]);
        let m = build_level_matrix(&s, AbstractionLevel::Action, &HashedBagOfWords::default(), ". ").unwrap();
        assert_eq!(m.get(0, 1), 0.0);
        assert_eq!(m.get(0, 2), 1.0);
        assert_eq!(m.get(1, 2), 1.0);
    }

    #[test]
    fn punctuation_only_text_is_a_zero_vector() {
        let s = space(vec![concept(1, &["..."]), concept(2, &["x"])]);
        assert_eq!(
            build_level_matrix(&s, AbstractionLevel::Action, &HashedBagOfWords::default(), ". "),
            Err(DistanceError::ZeroVector)
        );
    }

    #[test]
    fn too_few_concepts() {
        let s = space(vec![concept(1, &["x"])]);
        assert_eq!(
            build_level_matrix(&s, AbstractionLevel::Action, &HashedBagOfWords::default(), ". "),
            Err(DistanceError::TooFewConcepts(1))
        );
    }

    #[test]
    fn all_levels_in_order() {
        let s = space(vec![concept(1, &["a b"]), concept(2, &["b c"])]);
        for width in [1, 3, 7] {
            let opts = MatrixOptions {
                max_in_flight: width,
                ..MatrixOptions::default()
            };
            let ms = build_level_matrices(&s, &HashedBagOfWords::default(), &opts).unwrap();
            assert_eq!(ms.len(), 7);
            for (m, level) in ms.iter().zip(AbstractionLevel::ALL) {
                assert_eq!(m.label(), MatrixLabel::Level(level));
            }
            assert_abs_diff_eq!(ms[6].get(0, 1), 0.5, epsilon = 1e-12);
        }
    }
}
