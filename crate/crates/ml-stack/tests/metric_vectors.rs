//! Frozen evaluation vectors. The two reference points were derived by
//! hand from confusion counts: with TP=13, FP=1, FN=2 precision is 13/14
//! and recall 13/15, so F1 = 2PR/(P+R) = 26/29; with TP=65, FP=13, FN=9
//! F1 = 130/152. A third block cross-checks `evaluate` against a naive
//! recount over a thousand random prediction vectors.

use ml_stack::{evaluate, f1_score, EvalReport};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn high_precision_reference_point() {
    let r = EvalReport::from_counts(13, 1, 624, 2);
    assert!((r.precision - 0.9286).abs() < 1e-4, "precision {}", r.precision);
    assert!((r.recall - 0.8667).abs() < 1e-4, "recall {}", r.recall);
    assert!((r.f1 - 0.8966).abs() < 1e-4, "f1 {}", r.f1);
    assert!((f1_score(0.9286, 0.8667) - 0.8966).abs() < 1e-4);
}

#[test]
fn high_recall_reference_point() {
    let r = EvalReport::from_counts(65, 13, 913, 9);
    assert!((r.precision - 0.8333).abs() < 1e-4, "precision {}", r.precision);
    assert!((r.recall - 0.8784).abs() < 1e-4, "recall {}", r.recall);
    assert!((r.f1 - 0.8553).abs() < 1e-4, "f1 {}", r.f1);
    assert!((f1_score(0.8333, 0.8784) - 0.8553).abs() < 1e-4);
}

#[test]
fn f1_is_the_harmonic_mean_exactly() {
    // rational identity, no floating tolerance games: 26/29 and 130/152
    assert_eq!(EvalReport::from_counts(13, 1, 624, 2).f1, 26.0 / 29.0);
    assert_eq!(EvalReport::from_counts(65, 13, 913, 9).f1, 130.0 / 152.0);
}

#[test]
fn a_thousand_random_vectors_match_a_naive_recount() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xc0de);
    for round in 0..1000 {
        let n = rng.random_range(1..120);
        let preds: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let labels: Vec<u8> = (0..n).map(|_| u8::from(rng.random_bool(0.35))).collect();
        let threshold = rng.random_range(0.05..0.95);
        let r = evaluate(&preds, &labels, threshold).unwrap();

        let mut counts = (0u64, 0u64, 0u64, 0u64); // tp fp tn fn
        for (p, y) in preds.iter().zip(&labels) {
            match (*p >= threshold, *y) {
                (true, 1) => counts.0 += 1,
                (true, 0) => counts.1 += 1,
                (false, 0) => counts.2 += 1,
                (false, 1) => counts.3 += 1,
                _ => unreachable!(),
            }
        }
        assert_eq!((r.tp, r.fp, r.tn, r.fn_), counts, "round {round}");

        let (tp, fp, tn, fn_) = (counts.0 as f64, counts.1 as f64, counts.2 as f64, counts.3 as f64);
        let precision = if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 };
        let recall = if tp + fn_ > 0.0 { tp / (tp + fn_) } else { 0.0 };
        assert_eq!(r.precision, precision, "round {round}");
        assert_eq!(r.recall, recall, "round {round}");
        assert_eq!(r.f1, f1_score(precision, recall), "round {round}");
        assert_eq!(r.fpr, if fp + tn > 0.0 { fp / (fp + tn) } else { 0.0 }, "round {round}");
        assert_eq!(r.accuracy, (tp + tn) / n as f64, "round {round}");
    }
}
