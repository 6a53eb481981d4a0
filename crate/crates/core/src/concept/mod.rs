//! Concept spaces, SAPPhIRE instances, genealogy trees and level weights.

mod level;
mod space;
mod tree;
mod weights;

pub use level::{AbstractionLevel, UnknownLevelName};
pub use space::{
    validate_space, Concept, ConceptSpace, Issue, IssueKind, SapphireInstance, Severity,
    ValidationReport,
};
pub use tree::{tree_from_assignments, GenealogyTree, IdeaNode, LevelScheme, TreeError, TreeLevel};
pub use weights::{LevelWeights, WeightError};
