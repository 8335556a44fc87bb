mod common;

use common::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spanparse::decoder::{decode, decode_loss_augmented, fill_chart, hamming, tree_score};
use spanparse::scorer::SpanScores;
use spanparse::treebank::{Bracketing, Span};

#[test]
fn enumeration_counts_match_super_catalan() {
    let counts: Vec<usize> = (1..=8).map(|l| all_span_sets(l).len()).collect();
    assert_eq!(counts, vec![1, 1, 3, 11, 45, 197, 903, 4279]);
}

#[test]
fn decode_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for len in 2..=6 {
        let sets = all_span_sets(len);
        for _ in 0..30 {
            let s = random_scores(len, &mut rng);
            let best = sets.iter().map(|t| set_score(&s, t)).fold(f64::NEG_INFINITY, f64::max);
            let t = decode(&s).unwrap();
            let got = tree_score(&s, &t).unwrap();
            assert!((got - best).abs() < 1e-9, "L={len}: {got} vs {best}");
            assert!((fill_chart(&s).unwrap().total() - best).abs() < 1e-9);
        }
    }
}

#[test]
fn loss_augmented_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for len in 2..=6 {
        let sets = all_span_sets(len);
        for _ in 0..30 {
            let s = random_scores(len, &mut rng);
            let gold = random_bracketing(len, &mut rng);
            let g = spans_of(&gold);
            let best = sets
                .iter()
                .map(|t| set_score(&s, t) + set_hamming(len, &g, t) as f64)
                .fold(f64::NEG_INFINITY, f64::max);
            let aug = decode_loss_augmented(&s, &gold).unwrap();
            let t = spans_of(&aug.tree);
            let achieved = set_score(&s, &t) + set_hamming(len, &g, &t) as f64;
            assert!((achieved - best).abs() < 1e-9);
            assert!((aug.objective - best).abs() < 1e-9);
            assert_eq!(hamming(&gold, &aug.tree), set_hamming(len, &g, &t));
        }
    }
}

#[test]
fn all_zero_three_tokens_worst_tree() {
    let gold = Bracketing::new(3, [Span::new(0, 2)]).unwrap();
    let g = spans_of(&gold);
    let worst = all_span_sets(3)
        .iter()
        .map(|t| set_hamming(3, &g, t))
        .max()
        .unwrap();
    assert_eq!(worst, 2);
    let aug = decode_loss_augmented(&SpanScores::zeros(3), &gold).unwrap();
    assert_eq!(aug.objective, worst as f64);
}

#[test]
fn gold_objective_is_raw_score() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for len in 2..=8 {
        let gold = random_bracketing(len, &mut rng);
        let s = random_scores(len, &mut rng);
        let g = spans_of(&gold);
        assert_eq!(set_hamming(len, &g, &g), 0);
        assert_eq!(hamming(&gold, &gold), 0);
        assert!((tree_score(&s, &gold).unwrap() - set_score(&s, &g)).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn decoded_tree_is_valid_and_optimal(len in 1usize..=7, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_scores(len, &mut rng);
        let t = decode(&s).unwrap();
        prop_assert!(t.find_crossing().is_none());
        prop_assert!(t.contains(Span::new(0, len)));
        let best = all_span_sets(len).iter().map(|x| set_score(&s, x)).fold(f64::NEG_INFINITY, f64::max);
        prop_assert!((tree_score(&s, &t).unwrap() - best).abs() < 1e-9);
    }

    #[test]
    fn dominant_gold_is_returned(len in 2usize..=8, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gold = random_bracketing(len, &mut rng);
        let margin = (len * len + 1) as f64;
        let s = SpanScores::from_fn(len, |sp| if gold.contains(sp) { margin } else { -margin });
        prop_assert_eq!(&decode_loss_augmented(&s, &gold).unwrap().tree, &gold);
        prop_assert_eq!(&decode(&s).unwrap(), &gold);
    }

    #[test]
    fn decode_is_deterministic(len in 1usize..=10, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_scores(len, &mut rng);
        prop_assert_eq!(decode(&s).unwrap(), decode(&s).unwrap());
    }
}
