//! Variety metrics for design concept spaces.
//!
//! Two families live here. The genealogy-tree indices ([`tree_metrics`])
//! score how concepts distribute over idea nodes. The distance-based Rao
//! quadratic index ([`rqid`]) scores mean pairwise distance between concepts
//! described as SAPPhIRE models, with distances derived from construct texts
//! by an [`distance::EmbeddingProvider`].

pub mod analysis;
pub mod assessment;
pub mod concept;
pub mod distance;
pub mod rqid;
pub mod tree_metrics;

pub use assessment::{assess, assess_matrices, AssessError, AssessmentResult};
pub use concept::{AbstractionLevel, ConceptSpace, GenealogyTree, LevelWeights};
pub use distance::{DistanceMatrix, EmbeddingProvider};
