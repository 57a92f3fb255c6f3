//! Selection-rule fixtures built from hand-constructed models whose
//! predictions on the validation slice are known exactly, so every F1
//! value and every tiebreak step is verifiable on paper.

use ml_stack::tree::Node;
use ml_stack::{
    select_candidate, train_candidate, CandidateHyperparams, CandidateKind, CandidateModel,
    LinearModel, ProbPredictor,
};

/// Stump on feature 0: probability `at_most` when x <= threshold,
/// `above` otherwise.
fn stump(threshold: f64, at_most: f64, above: f64) -> ml_stack::tree::Tree {
    ml_stack::tree::Tree::from_nodes(
        vec![
            Node::Split { feature: 0, threshold, left: 1, right: 2 },
            Node::Leaf { value: at_most },
            Node::Leaf { value: above },
        ],
        1,
    )
    .unwrap()
}

fn constant(value: f64) -> ml_stack::tree::Tree {
    ml_stack::tree::Tree::from_nodes(vec![Node::Leaf { value }], 1).unwrap()
}

fn rows(n: usize) -> Vec<Vec<f64>> {
    (0..n).map(|i| vec![i as f64]).collect()
}

#[test]
fn argmax_f1_picks_the_exact_matcher() {
    // y: five positives then five negatives, feature = index
    let x = rows(10);
    let y = vec![1, 1, 1, 1, 1, 0, 0, 0, 0, 0];
    let models = vec![
        // everything positive: TP=5 FP=5 -> F1 = 2/3
        CandidateModel::DecisionTree(constant(0.9)),
        // inverted sense: predicts 1 exactly on the positives
        CandidateModel::DecisionTree(stump(4.5, 0.9, 0.1)),
        // only the first three positives: TP=3 FN=2 -> F1 = 0.75
        CandidateModel::DecisionTree(stump(2.5, 0.9, 0.1)),
        // silent: F1 = 0
        CandidateModel::DecisionTree(constant(0.1)),
    ];
    let (best, reports) = select_candidate(&models, &x, &y).unwrap();
    assert_eq!(best, 1);
    let expected = [2.0 / 3.0, 1.0, 0.75, 0.0];
    for (report, want) in reports.iter().zip(expected) {
        assert!((report.f1 - want).abs() < 1e-12, "f1 {} != {want}", report.f1);
    }
}

#[test]
fn equal_f1_resolves_by_higher_recall() {
    // 6 positives, 6 negatives. Loud model: TP=6 FP=6 -> F1 = 12/18 = 2/3,
    // recall 1. Quiet model: TP=3 FP=0 -> F1 = 6/9 = 2/3, recall 1/2.
    let x = rows(12);
    let y = vec![1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0];
    let quiet = CandidateModel::DecisionTree(stump(2.5, 0.9, 0.1));
    let loud = CandidateModel::DecisionTree(constant(0.9));
    let (best, reports) = select_candidate(&[quiet, loud], &x, &y).unwrap();
    assert_eq!(reports[0].f1, reports[1].f1, "fixture must tie on F1");
    assert_eq!(best, 1, "recall 1 beats recall 0.5");
}

#[test]
fn zero_f1_resolves_by_lower_false_positive_rate() {
    // neither model finds any positive; the silent one raises no alarms
    let x = rows(8);
    let y = vec![1, 1, 0, 0, 0, 0, 0, 0];
    let noisy = CandidateModel::DecisionTree(stump(5.5, 0.1, 0.9)); // two FPs
    let silent = CandidateModel::DecisionTree(constant(0.1));
    let (best, reports) = select_candidate(&[noisy, silent], &x, &y).unwrap();
    assert_eq!((reports[0].f1, reports[1].f1), (0.0, 0.0));
    assert_eq!((reports[0].recall, reports[1].recall), (0.0, 0.0));
    assert!(reports[0].fpr > reports[1].fpr);
    assert_eq!(best, 1);
}

#[test]
fn full_tie_resolves_by_fixed_kind_order() {
    // four models of different kinds making identical predictions:
    // label 1 exactly when the single feature is 1
    let x = vec![vec![0.0], vec![0.0], vec![1.0], vec![1.0]];
    let y = vec![0, 0, 1, 1];
    let lr = CandidateModel::LogisticRegression(LinearModel { weights: vec![8.0], bias: -4.0 });
    let dt = CandidateModel::DecisionTree(stump(0.5, 0.1, 0.9));
    let rf = CandidateModel::RandomForest(ml_stack::candidates::Forest {
        trees: vec![stump(0.5, 0.1, 0.9)],
    });
    let gbt = CandidateModel::GradientBoosting(ml_stack::candidates::Boost {
        init_logit: 0.0,
        shrinkage: 1.0,
        trees: vec![stump(0.5, -4.0, 4.0)],
    });
    for (row, label) in x.iter().zip(&y) {
        for m in [&lr, &dt, &rf, &gbt] {
            assert_eq!(m.predict_label(row, 0.5), *label, "{:?}", m.kind());
        }
    }

    // regardless of list order, logistic regression wins the dead heat
    let (best, _) = select_candidate(
        &[gbt.clone(), rf.clone(), dt.clone(), lr.clone()],
        &x,
        &y,
    )
    .unwrap();
    assert_eq!(best, 3);
    let (best, _) = select_candidate(&[dt, gbt, lr, rf], &x, &y).unwrap();
    assert_eq!(best, 2);
}

#[test]
fn trained_tree_beats_trained_linear_model_on_xor() {
    // XOR blown up to ten coincident points per corner; the duplication
    // keeps every quadrant past min_samples_leaf at depth two
    let mut x = Vec::new();
    let mut y = Vec::new();
    for i in 0..40 {
        let (a, b) = ((i / 2) % 2, i % 2);
        x.push(vec![a as f64, b as f64]);
        y.push((a ^ b) as u8);
    }
    let hp = CandidateHyperparams::default();
    let dt = train_candidate(CandidateKind::DecisionTree, &x, &y, &hp).unwrap();
    let lr = train_candidate(CandidateKind::LogisticRegression, &x, &y, &hp).unwrap();
    let acc = |m: &CandidateModel| {
        x.iter().zip(&y).filter(|(r, l)| m.predict_label(r, 0.5) == **l).count()
    };
    assert_eq!(acc(&dt), 40, "a depth-2 tree expresses XOR exactly");
    assert!(acc(&lr) <= 30, "no linear boundary does, got {}/40", acc(&lr));

    let (best, _) = select_candidate(&[lr, dt], &x, &y).unwrap();
    assert_eq!(best, 1);
}
