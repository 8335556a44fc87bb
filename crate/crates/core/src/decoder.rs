//! Label-aware CKY over NT / ∅ span labels.
//!
//! Every span of length ≥ 2 in the binary chart is either kept (NT, adds its
//! score) or collapsed (∅, adds 0). Collapsing ∅ nodes turns the best binary
//! tree into an n-ary [`Bracketing`]. The root is always NT and single-token
//! spans carry no decision.
//!
//! Ties are broken deterministically: the smallest split point wins, and a
//! span is labeled NT only when its score is strictly positive. With all
//! scores zero the decoder therefore returns the flat tree.

use crate::error::{Error, Result};
use crate::scorer::SpanScores;
use crate::treebank::{Bracketing, Span};

/// Filled CKY chart.
#[derive(Clone, Debug)]
pub struct Chart {
    pub best: SpanScores,
    split: Vec<usize>,
    keep: Vec<bool>,
}

impl Chart {
    pub fn split(&self, span: Span) -> Option<usize> {
        (span.len() >= 2).then(|| self.split[self.best.index(span.begin, span.end)])
    }

    pub fn keep(&self, span: Span) -> bool {
        self.keep[self.best.index(span.begin, span.end)]
    }

    /// Objective of the best tree over the whole sentence.
    pub fn total(&self) -> f64 {
        self.best.get(Span::new(0, self.best.sentence_len()))
    }

    fn bracketing(&self) -> Bracketing {
        let len = self.best.sentence_len();
        let mut spans = Vec::new();
        let mut stack = vec![Span::new(0, len)];
        while let Some(span) = stack.pop() {
            if self.keep(span) {
                spans.push(span);
            }
            if span.len() >= 2 {
                let k = self.split(span).expect("split recorded");
                stack.push(Span::new(span.begin, k));
                stack.push(Span::new(k, span.end));
            }
        }
        Bracketing::new(len, spans).expect("chart yields a valid bracketing")
    }
}

/// Runs CKY over NT cell scores `cells`.
pub fn fill_chart(cells: &SpanScores) -> Result<Chart> {
    let len = cells.sentence_len();
    if len == 0 {
        return Err(Error::invalid("cannot decode an empty sentence"));
    }
    if !cells.is_finite() {
        return Err(Error::invalid("non-finite span score"));
    }
    let mut best = SpanScores::zeros(len);
    let mut split = vec![0usize; best.span_count()];
    let mut keep = vec![false; best.span_count()];
    if len == 1 {
        let root = Span::new(0, 1);
        best.set(root, cells.get(root));
        keep[0] = true;
    }
    for width in 2..=len {
        for b in 0..=len - width {
            let e = b + width;
            let mut arg = b + 1;
            let mut top = f64::NEG_INFINITY;
            for k in b + 1..e {
                let v = best.get(Span::new(b, k)) + best.get(Span::new(k, e));
                if v > top {
                    top = v;
                    arg = k;
                }
            }
            let span = Span::new(b, e);
            let s = cells.get(span);
            let is_root = width == len;
            let kept = is_root || s > 0.0;
            let idx = best.index(b, e);
            split[idx] = arg;
            keep[idx] = kept;
            best.set(span, top + if kept { s } else { 0.0 });
        }
    }
    Ok(Chart { best, split, keep })
}

/// The tree maximizing the sum of its span scores.
pub fn decode(scores: &SpanScores) -> Result<Bracketing> {
    Ok(fill_chart(scores)?.bracketing())
}

/// Sum of the scores of `tree`'s spans.
pub fn tree_score(scores: &SpanScores, tree: &Bracketing) -> Result<f64> {
    if tree.sentence_len() != scores.sentence_len() {
        return Err(Error::invalid(format!(
            "tree over {} tokens scored against table for {}",
            tree.sentence_len(),
            scores.sentence_len()
        )));
    }
    tree.spans().map(|s| scores.try_get(s)).sum()
}

/// Hamming distance over span labels: non-root spans of length ≥ 2 present
/// in exactly one of the two trees.
pub fn hamming(gold: &Bracketing, other: &Bracketing) -> usize {
    let missing = gold.constituents().filter(|s| !other.contains(*s)).count();
    let extra = other.constituents().filter(|s| !gold.contains(*s)).count();
    missing + extra
}

/// Result of loss-augmented decoding.
#[derive(Clone, Debug)]
pub struct Augmented {
    pub tree: Bracketing,
    /// `score(tree) + Δ(gold, tree)`.
    pub objective: f64,
}

/// `argmax_T score(T) + Δ(gold, T)`.
///
/// The Hamming loss decomposes over spans: every span of length ≥ 2 has gold
/// label NT or ∅, and a tree pays 1 for each span whose label differs. A
/// candidate NT span outside gold therefore gains +1, one inside gold loses 1
/// relative to the constant `|gold|` paid when all of gold is missed.
pub fn decode_loss_augmented(scores: &SpanScores, gold: &Bracketing) -> Result<Augmented> {
    let len = scores.sentence_len();
    if gold.sentence_len() != len {
        return Err(Error::invalid(format!(
            "gold tree over {} tokens, scores over {len}",
            gold.sentence_len()
        )));
    }
    let root = Span::new(0, len);
    let mut cells = scores.clone();
    for b in 0..len {
        for e in b + 2..=len {
            let span = Span::new(b, e);
            if span == root {
                continue;
            }
            cells.add(span, if gold.contains(span) { -1.0 } else { 1.0 });
        }
    }
    let chart = fill_chart(&cells)?;
    let constant = gold.constituents().count() as f64;
    Ok(Augmented {
        tree: chart.bracketing(),
        objective: chart.total() + constant,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spans(b: &Bracketing) -> Vec<(usize, usize)> {
        b.spans().map(|s| (s.begin, s.end)).collect()
    }

    #[test]
    fn three_token_example() {
        let mut s = SpanScores::from_fn(3, |_| -0.5);
        s.set(Span::new(0, 2), 1.0);
        s.set(Span::new(1, 3), 2.0);
        s.set(Span::new(0, 3), 7.0);
        let t = decode(&s).unwrap();
        assert_eq!(spans(&t), vec![(0, 3), (1, 3)]);
        assert_eq!(tree_score(&s, &t).unwrap(), 9.0);
    }

    #[test]
    fn single_token() {
        let s = SpanScores::from_fn(1, |_| -3.0);
        let t = decode(&s).unwrap();
        assert_eq!(spans(&t), vec![(0, 1)]);
        assert_eq!(fill_chart(&s).unwrap().total(), -3.0);
    }

    #[test]
    fn zero_scores_give_flat_tree() {
        for len in 1..8 {
            let t = decode(&SpanScores::zeros(len)).unwrap();
            assert_eq!(t, Bracketing::flat(len));
        }
    }

    #[test]
    fn non_finite_rejected() {
        let mut s = SpanScores::zeros(3);
        s.set(Span::new(0, 2), f64::NAN);
        assert!(decode(&s).is_err());
    }

    #[test]
    fn tree_score_examples() {
        let gold = Bracketing::new(5, [Span::new(0, 2), Span::new(2, 5)]).unwrap();
        let mut s = SpanScores::zeros(5);
        s.set(Span::new(0, 2), 1.0);
        s.set(Span::new(2, 5), 2.0);
        s.set(Span::new(0, 5), 0.5);
        assert_eq!(tree_score(&s, &gold).unwrap(), 3.5);

        let mut r = SpanScores::zeros(4);
        r.set(Span::new(0, 4), 1.25);
        assert_eq!(tree_score(&r, &Bracketing::flat(4)).unwrap(), 1.25);
        assert_eq!(tree_score(&SpanScores::zeros(5), &gold).unwrap(), 0.0);
        assert!(tree_score(&SpanScores::zeros(4), &gold).is_err());
    }

    #[test]
    fn loss_augmented_all_zero() {
        let gold = Bracketing::new(3, [Span::new(0, 2)]).unwrap();
        let aug = decode_loss_augmented(&SpanScores::zeros(3), &gold).unwrap();
        assert_eq!(spans(&aug.tree), vec![(0, 3), (1, 3)]);
        assert_eq!(aug.objective, 2.0);
        assert_eq!(hamming(&gold, &aug.tree), 2);
    }

    #[test]
    fn loss_augmented_returns_dominant_gold() {
        let gold = Bracketing::new(5, [Span::new(0, 2), Span::new(2, 5), Span::new(3, 5)])
            .unwrap();
        let s = SpanScores::from_fn(5, |sp| if gold.contains(sp) { 30.0 } else { -30.0 });
        let aug = decode_loss_augmented(&s, &gold).unwrap();
        assert_eq!(aug.tree, gold);
        assert_eq!(aug.objective, tree_score(&s, &gold).unwrap());
    }

    #[test]
    fn length_mismatch() {
        let gold = Bracketing::flat(4);
        assert!(decode_loss_augmented(&SpanScores::zeros(3), &gold).is_err());
    }

    #[test]
    fn hamming_identity() {
        let t = Bracketing::new(6, [Span::new(0, 3), Span::new(1, 3), Span::new(3, 6)]).unwrap();
        assert_eq!(hamming(&t, &t), 0);
        assert_eq!(hamming(&t, &Bracketing::flat(6)), 3);
    }
}
