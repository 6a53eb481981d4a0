mod common;

use common::cw_space;
use variety_core::analysis::dendrogram;
use variety_core::concept::{validate_space, AbstractionLevel, LevelWeights};
use variety_core::distance::{HashedBagOfWords, MatrixOptions};
use variety_core::assess;

#[test]
fn fixture_is_valid() {
    let space = cw_space();
    assert_eq!(space.len(), 4);
    assert!(validate_space(&space).is_valid());
}

#[test]
fn identical_action_texts_are_at_distance_zero() {
    let r = assess(&cw_space(), &HashedBagOfWords::default(), &LevelWeights::default(), &MatrixOptions::default()).unwrap();
    let actions = &r.level_matrices[AbstractionLevel::Action.slot()];
    assert_eq!(actions.get(0, 1), 0.0);
    assert!((0.0..=1.0).contains(&r.overall));
}

#[test]
fn friction_heater_is_the_state_outlier() {
    let r = assess(&cw_space(), &HashedBagOfWords::default(), &LevelWeights::default(), &MatrixOptions::default()).unwrap();
    let states = r
        .level_boxplots
        .iter()
        .find(|b| b.level == AbstractionLevel::StateChange)
        .unwrap();
    let outliers: Vec<u32> = states.outliers.iter().map(|o| o.concept_id).collect();
    assert_eq!(outliers, vec![4]);
}

#[test]
fn heat_concepts_merge_before_the_friction_heater() {
    let r = assess(&cw_space(), &HashedBagOfWords::default(), &LevelWeights::default(), &MatrixOptions::default()).unwrap();
    let tree = dendrogram(&r.weighted_matrix, &r.concept_ids()).unwrap();
    // the last merge joins the friction heater (index 3) alone with the rest
    let last = tree.merges.last().unwrap();
    assert!(last.left == 3 || last.right == 3, "{tree:?}");
    assert_eq!(tree.cut(2), vec![0, 0, 0, 1]);
}
