//! Classifier behaviour on the synthetic naming benchmark.

mod common;

use common::Synthetic;
use namewise::mcc::{check_classification, extract_features, fit_classifier, FitConfig};
use namewise::negsample::{build_mcc_dataset, EditDistribution, Label, Vocabulary};

fn share_consistent(dist: &EditDistribution) -> f64 {
    let synth = Synthetic::default();
    let train = synth.records(1000, "train", 21);
    let test = synth.records(1000, "test", 22);
    let vocab = Vocabulary::from_records(&train);
    let ds = build_mcc_dataset(&train, dist, &vocab, 1.0, 23).unwrap();
    let (model, report) = fit_classifier(&ds, &FitConfig::default()).unwrap();
    assert!(report.final_loss < report.initial_loss);
    let kept = test.iter().filter(|r| check_classification(&model, r, &r.name).unwrap().label == Label::Consistent).count();
    kept as f64 / test.len() as f64
}

#[test]
fn well_fit_model_keeps_held_out_positives() {
    // Unrelated-name negatives: the features separate the classes cleanly.
    let share = share_consistent(&EditDistribution::new(0.0, 0.0, 0.0, 1.0).unwrap());
    assert!(share >= 0.9, "{share}");
}

#[test]
fn hard_negatives_cost_some_positives() {
    let share = share_consistent(&EditDistribution::default());
    assert!(share > 0.5 && share < 0.95, "{share}");
}

#[test]
fn synonym_rewrite_preserves_features() {
    let synth = Synthetic::default();
    let mut rng = namewise::negsample::example_rng(9, 0);
    for i in 0..200 {
        let base = synth.base_record(&mut rng, "p", i);
        let syn = Synthetic::rewrite(&base);
        assert_eq!(extract_features(&base, &base.name), extract_features(&syn, &syn.name));
        assert!(base.name.iter().all(|t| !syn.name.iter().any(|u| u == t)));
    }
}
