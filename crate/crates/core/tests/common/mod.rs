#![allow(dead_code)]

use variety_core::concept::{
    AbstractionLevel, Concept, ConceptSpace, GenealogyTree, IdeaNode, SapphireInstance, TreeLevel,
};

pub const CW_CSV: &str = include_str!("../../../../fixtures/cw.csv");

/// Minimal reader for the space CSV fixture (one instance per row).
pub fn cw_space() -> ConceptSpace {
    let mut reader = csv::Reader::from_reader(CW_CSV.as_bytes());
    let mut concepts: Vec<Concept> = Vec::new();
    for row in reader.records() {
        let row = row.unwrap();
        let id: u32 = row[0].parse().unwrap();
        let texts: [String; 7] = std::array::from_fn(|k| row[3 + k].to_string());
        let instance = SapphireInstance::new(row[2].parse().unwrap(), texts);
        match concepts.iter_mut().find(|c| c.concept_id == id) {
            Some(c) => c.instances.push(instance),
            None => concepts.push(Concept {
                concept_id: id,
                name: row[1].to_string(),
                instances: vec![instance],
            }),
        }
    }
    ConceptSpace {
        space_id: "cw".into(),
        problem: "How to boil water?".into(),
        concepts,
    }
}

/// One-level tree whose nodes hold `counts`.
pub fn flat_tree(counts: &[u64], weight: f64) -> GenealogyTree {
    let nodes = counts
        .iter()
        .enumerate()
        .map(|(i, &count)| IdeaNode {
            level: 1,
            label: format!("idea{i}"),
            parent: None,
            count,
            function: 0,
        })
        .collect();
    GenealogyTree::new(vec![TreeLevel { alpha: 1, weight }], nodes, vec![1.0]).unwrap()
}

/// All vectors of `parts` non-negative integers summing to `n`.
pub fn compositions(n: u64, parts: usize) -> Vec<Vec<u64>> {
    if parts == 1 {
        return vec![vec![n]];
    }
    let mut out = Vec::new();
    for first in 0..=n {
        for mut rest in compositions(n - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

pub fn level_ids() -> [AbstractionLevel; 7] {
    AbstractionLevel::ALL
}
