use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use super::AbstractionLevel;

/// One SAPPhIRE instance: a construct text per abstraction level.
///
/// Instances built through [`SapphireInstance::new`] always carry all seven
/// slots. Deserialized instances may lack some; [`validate_space`] reports
/// those and [`SapphireInstance::construct`] reads a missing slot as empty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SapphireInstance {
    pub instance_id: u32,
    pub constructs: BTreeMap<AbstractionLevel, String>,
}

impl SapphireInstance {
    /// `texts` are given in level order, Part first and Action last.
    pub fn new<S: Into<String>>(instance_id: u32, texts: [S; 7]) -> Self {
        let constructs = AbstractionLevel::ALL
            .into_iter()
            .zip(texts)
            .map(|(level, text)| (level, text.into()))
            .collect();
        Self {
            instance_id,
            constructs,
        }
    }

    pub fn construct(&self, level: AbstractionLevel) -> &str {
        self.constructs.get(&level).map(String::as_str).unwrap_or("")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Concept {
    pub concept_id: u32,
    pub name: String,
    pub instances: Vec<SapphireInstance>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConceptSpace {
    pub space_id: String,
    #[serde(default)]
    pub problem: String,
    pub concepts: Vec<Concept>,
}

impl ConceptSpace {
    pub fn len(&self) -> usize {
        self.concepts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.concepts.is_empty()
    }

    pub fn concept(&self, concept_id: u32) -> Option<&Concept> {
        self.concepts.iter().find(|c| c.concept_id == concept_id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IssueKind {
    EmptySpace,
    DuplicateConceptId,
    NoInstances,
    DuplicateInstanceId,
    InstanceIdGap,
    MissingConstruct,
    EmptyConstruct,
}

impl IssueKind {
    pub fn severity(self) -> Severity {
        match self {
            IssueKind::EmptyConstruct => Severity::Warning,
            _ => Severity::Error,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Issue {
    pub kind: IssueKind,
    pub severity: Severity,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub concept_id: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub instance_id: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level: Option<AbstractionLevel>,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.issues.is_empty()
    }

    /// True when no issue is an error; warnings are allowed.
    pub fn is_valid(&self) -> bool {
        self.errors().next().is_none()
    }

    pub fn errors(&self) -> impl Iterator<Item = &Issue> {
        self.issues.iter().filter(|i| i.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Issue> {
        self.issues.iter().filter(|i| i.severity == Severity::Warning)
    }

    fn push(
        &mut self,
        kind: IssueKind,
        concept_id: Option<u32>,
        instance_id: Option<u32>,
        level: Option<AbstractionLevel>,
        message: String,
    ) {
        self.issues.push(Issue {
            kind,
            severity: kind.severity(),
            concept_id,
            instance_id,
            level,
            message,
        });
    }
}

/// Checks the structural invariants of a concept space. Never fails; every
/// problem found ends up in the report.
pub fn validate_space(space: &ConceptSpace) -> ValidationReport {
    let mut report = ValidationReport::default();
    if space.concepts.is_empty() {
        report.push(IssueKind::EmptySpace, None, None, None, "empty space".into());
        return report;
    }

    let mut seen_concepts = HashSet::new();
    for concept in &space.concepts {
        let cid = Some(concept.concept_id);
        if !seen_concepts.insert(concept.concept_id) {
            report.push(
                IssueKind::DuplicateConceptId,
                cid,
                None,
                None,
                format!("duplicate concept id {}", concept.concept_id),
            );
        }
        if concept.instances.is_empty() {
            report.push(
                IssueKind::NoInstances,
                cid,
                None,
                None,
                format!("concept {} has no SAPPhIRE instances", concept.concept_id),
            );
            continue;
        }

        let mut seen_instances = HashSet::new();
        let mut duplicated = false;
        for instance in &concept.instances {
            let iid = Some(instance.instance_id);
            if !seen_instances.insert(instance.instance_id) {
                duplicated = true;
                report.push(
                    IssueKind::DuplicateInstanceId,
                    cid,
                    iid,
                    None,
                    format!(
                        "duplicate instance id {} in concept {}",
                        instance.instance_id, concept.concept_id
                    ),
                );
            }
            for level in AbstractionLevel::ALL {
                match instance.constructs.get(&level) {
                    None => report.push(
                        IssueKind::MissingConstruct,
                        cid,
                        iid,
                        Some(level),
                        format!(
                            "concept {} instance {} has no {} slot",
                            concept.concept_id, instance.instance_id, level
                        ),
                    ),
                    Some(text) if text.trim().is_empty() => report.push(
                        IssueKind::EmptyConstruct,
                        cid,
                        iid,
                        Some(level),
                        format!(
                            "concept {} instance {} has an empty {} construct",
                            concept.concept_id, instance.instance_id, level
                        ),
                    ),
                    Some(_) => {}
                }
            }
        }

        let k = concept.instances.len() as u32;
        if !duplicated && seen_instances.iter().any(|&id| id == 0 || id > k) {
            report.push(
                IssueKind::InstanceIdGap,
                cid,
                None,
                None,
                format!(
                    "instance ids of concept {} are not 1..{}",
                    concept.concept_id, k
                ),
            );
        }
    }
    report
}
