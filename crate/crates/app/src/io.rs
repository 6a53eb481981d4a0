//! Space, tree, vector and result files.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use variety_core::analysis::CurvePoint;
use variety_core::concept::{
    validate_space, AbstractionLevel, Concept, ConceptSpace, GenealogyTree, SapphireInstance,
    TreeError, ValidationReport,
};
use variety_core::distance::{DistanceError, PrecomputedVectors};

use crate::report::ResultDocument;

pub const SPACE_HEADER: [&str; 10] = [
    "concept_id",
    "concept_name",
    "instance_id",
    "part",
    "organ",
    "effect",
    "phenomenon",
    "input",
    "state_change",
    "action",
];

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("cannot access {path}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: u64,
        column: u64,
        message: String,
    },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("duplicate instance {instance_id} of concept {concept_id} at line {line}")]
    DuplicateInstance {
        concept_id: u32,
        instance_id: u32,
        line: u64,
    },
    #[error("unknown file format for {0} (expected .csv or .json)")]
    UnknownFormat(PathBuf),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Vectors(#[from] DistanceError),
    #[error("csv write failed: {0}")]
    CsvWrite(String),
}

impl IoError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        IoError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    fn json(e: &serde_json::Error) -> Self {
        IoError::Parse {
            line: e.line() as u64,
            column: e.column() as u64,
            message: e.to_string(),
        }
    }

    fn csv(e: &csv::Error) -> Self {
        let line = e.position().map_or(0, |p| p.line());
        IoError::Parse {
            line,
            column: 0,
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn from_path(path: &Path) -> Result<Self, IoError> {
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
            Some("csv") => Ok(Format::Csv),
            Some("json") => Ok(Format::Json),
            _ => Err(IoError::UnknownFormat(path.to_path_buf())),
        }
    }
}

/// A parsed space plus its validation report.
#[derive(Debug, Clone, PartialEq)]
pub struct ImportedSpace {
    pub space: ConceptSpace,
    pub report: ValidationReport,
}

fn read(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|e| IoError::io(path, e))
}

fn write(path: &Path, contents: &[u8]) -> Result<(), IoError> {
    fs::write(path, contents).map_err(|e| IoError::io(path, e))
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("space")
        .to_string()
}

pub fn import_space(path: &Path, format: Option<Format>) -> Result<ImportedSpace, IoError> {
    let format = match format {
        Some(f) => f,
        None => Format::from_path(path)?,
    };
    let text = read(path)?;
    let space = match format {
        Format::Csv => space_from_csv(&text, &stem(path))?,
        Format::Json => space_from_json(&text)?,
    };
    let report = validate_space(&space);
    Ok(ImportedSpace { space, report })
}

/// Parses the one-row-per-instance table. Concepts keep first-appearance
/// order; instances are sorted by id.
pub fn space_from_csv(text: &str, space_id: &str) -> Result<ConceptSpace, IoError> {
    if text.trim().is_empty() {
        return Err(IoError::Parse {
            line: 1,
            column: 1,
            message: "empty file".into(),
        });
    }
    let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| IoError::csv(&e))?.clone();
    check_header(header.iter().map(|h| h.trim_start_matches('\u{feff}')))?;

    let mut concepts: Vec<Concept> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| IoError::csv(&e))?;
        let line = record.position().map_or(0, |p| p.line());
        let number = |column: usize| -> Result<u32, IoError> {
            record[column].trim().parse().map_err(|_| IoError::Parse {
                line,
                column: column as u64 + 1,
                message: format!("{} must be a non-negative integer, got {:?}", SPACE_HEADER[column], &record[column]),
            })
        };
        let concept_id = number(0)?;
        let instance_id = number(2)?;
        let name = record[1].to_string();
        let texts: [String; 7] = std::array::from_fn(|k| record[3 + k].to_string());
        let instance = SapphireInstance::new(instance_id, texts);

        let concept = match concepts.iter_mut().position(|c| c.concept_id == concept_id) {
            Some(i) => &mut concepts[i],
            None => {
                concepts.push(Concept {
                    concept_id,
                    name: name.clone(),
                    instances: Vec::new(),
                });
                concepts.last_mut().expect("just pushed")
            }
        };
        if concept.name != name {
            return Err(IoError::Parse {
                line,
                column: 2,
                message: format!("concept {concept_id} is named both {:?} and {name:?}", concept.name),
            });
        }
        if concept.instances.iter().any(|i| i.instance_id == instance_id) {
            return Err(IoError::DuplicateInstance {
                concept_id,
                instance_id,
                line,
            });
        }
        concept.instances.push(instance);
    }
    for c in &mut concepts {
        c.instances.sort_by_key(|i| i.instance_id);
    }
    Ok(ConceptSpace {
        space_id: space_id.to_string(),
        problem: String::new(),
        concepts,
    })
}

fn check_header<'a>(found: impl Iterator<Item = &'a str>) -> Result<(), IoError> {
    let found: Vec<&str> = found.collect();
    for (i, expected) in SPACE_HEADER.iter().enumerate() {
        match found.get(i) {
            Some(h) if h.trim() == *expected => {}
            Some(h) => {
                return Err(IoError::Schema(format!(
                    "column {} is {h:?}, expected {expected:?}",
                    i + 1
                )))
            }
            None => return Err(IoError::Schema(format!("missing column {expected:?}"))),
        }
    }
    if let Some(extra) = found.get(SPACE_HEADER.len()) {
        return Err(IoError::Schema(format!("unexpected extra column {extra:?}")));
    }
    Ok(())
}

pub fn space_from_json(text: &str) -> Result<ConceptSpace, IoError> {
    if text.trim().is_empty() {
        return Err(IoError::Parse {
            line: 1,
            column: 1,
            message: "empty file".into(),
        });
    }
    let mut space: ConceptSpace = serde_json::from_str(text).map_err(|e| IoError::json(&e))?;
    for c in &mut space.concepts {
        c.instances.sort_by_key(|i| i.instance_id);
        if let Some(w) = c.instances.windows(2).find(|w| w[0].instance_id == w[1].instance_id) {
            return Err(IoError::DuplicateInstance {
                concept_id: c.concept_id,
                instance_id: w[0].instance_id,
                line: 0,
            });
        }
    }
    Ok(space)
}

pub fn space_to_csv(space: &ConceptSpace) -> Result<String, IoError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| IoError::CsvWrite(e.to_string());
    w.write_record(SPACE_HEADER).map_err(fail)?;
    for c in &space.concepts {
        for inst in &c.instances {
            let mut row = vec![c.concept_id.to_string(), c.name.clone(), inst.instance_id.to_string()];
            row.extend(AbstractionLevel::ALL.iter().map(|&l| inst.construct(l).to_string()));
            w.write_record(&row).map_err(fail)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| IoError::CsvWrite(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn export_space(space: &ConceptSpace, path: &Path, format: Option<Format>) -> Result<(), IoError> {
    let format = match format {
        Some(f) => f,
        None => Format::from_path(path)?,
    };
    let text = match format {
        Format::Csv => space_to_csv(space)?,
        Format::Json => to_json(space),
    };
    write(path, text.as_bytes())
}

pub fn load_tree(path: &Path) -> Result<GenealogyTree, IoError> {
    let text = read(path)?;
    serde_json::from_str(&text).map_err(|e| IoError::json(&e))
}

/// Reads `concept_id,level,v0,v1,…`. Levels may be given by key, name or index.
pub fn load_vectors(path: &Path) -> Result<PrecomputedVectors, IoError> {
    let text = read(path)?;
    vectors_from_csv(&text, &stem(path))
}

pub fn vectors_from_csv(text: &str, id: &str) -> Result<PrecomputedVectors, IoError> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| IoError::csv(&e))?.clone();
    if header.len() < 3 || &header[0] != "concept_id" || &header[1] != "level" {
        return Err(IoError::Schema(
            "vector file header must start with concept_id,level,v0".into(),
        ));
    }
    let mut vectors = PrecomputedVectors::new(id);
    for record in reader.records() {
        let record = record.map_err(|e| IoError::csv(&e))?;
        let line = record.position().map_or(0, |p| p.line());
        let bad = |column: usize, what: &str| IoError::Parse {
            line,
            column: column as u64 + 1,
            message: format!("{what}: {:?}", &record[column]),
        };
        let concept_id: u32 = record[0].trim().parse().map_err(|_| bad(0, "bad concept id"))?;
        let level: AbstractionLevel = record[1].trim().parse().map_err(|_| bad(1, "bad level"))?;
        let values = (2..record.len())
            .map(|k| record[k].trim().parse::<f64>().map_err(|_| bad(k, "bad vector component")))
            .collect::<Result<Vec<_>, _>>()?;
        vectors.insert(concept_id, level, values)?;
    }
    Ok(vectors)
}

/// Pretty JSON with a trailing newline; field order follows struct order.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

pub fn read_result(path: &Path) -> Result<ResultDocument, IoError> {
    let text = read(path)?;
    serde_json::from_str(&text).map_err(|e| IoError::json(&e))
}

pub fn export_results(doc: &ResultDocument, path: &Path, format: Format) -> Result<(), IoError> {
    let text = match format {
        Format::Json => to_json(doc),
        Format::Csv => results_to_csv(doc)?,
    };
    write(path, text.as_bytes())
}

#[derive(Serialize)]
struct ResultRow<'a> {
    record: &'a str,
    concept_id: Option<u32>,
    other_concept_id: Option<u32>,
    level: Option<&'a str>,
    value: f64,
}

/// Long-format table: one row per score or matrix entry.
pub fn results_to_csv(doc: &ResultDocument) -> Result<String, IoError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| IoError::CsvWrite(e.to_string());
    let row = |record, concept_id, other_concept_id, level, value| ResultRow {
        record,
        concept_id,
        other_concept_id,
        level,
        value,
    };
    w.serialize(row("overall", None, None, None, doc.overall)).map_err(fail)?;
    for (level, v) in &doc.per_level {
        w.serialize(row("level", None, None, Some(level.key()), *v)).map_err(fail)?;
    }
    for c in &doc.per_concept {
        w.serialize(row("concept", Some(c.concept_id), None, None, c.score)).map_err(fail)?;
    }
    for c in &doc.per_concept_per_level {
        for (level, v) in &c.scores {
            w.serialize(row("concept_level", Some(c.concept_id), None, Some(level.key()), *v))
                .map_err(fail)?;
        }
    }
    let ids: Vec<u32> = doc.per_concept.iter().map(|c| c.concept_id).collect();
    for (i, a) in ids.iter().enumerate() {
        for (j, b) in ids.iter().enumerate() {
            w.serialize(row("weighted_distance", Some(*a), Some(*b), None, doc.weighted_matrix.get(i, j)))
                .map_err(fail)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| IoError::CsvWrite(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn curve_to_csv(points: &[CurvePoint]) -> Result<String, IoError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for p in points {
        w.serialize(p).map_err(|e| IoError::CsvWrite(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| IoError::CsvWrite(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), IoError> {
    write(path, text.as_bytes())
}

/// Instance counts per concept, for import summaries.
pub fn instance_counts(space: &ConceptSpace) -> BTreeMap<u32, usize> {
    space
        .concepts
        .iter()
        .map(|c| (c.concept_id, c.instances.len()))
        .collect()
}
