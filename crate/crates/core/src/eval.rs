//! Unlabeled bracketing precision, recall and F1, `evalb` style.
//!
//! Punctuation is removed from both trees before brackets are compared. Which
//! tokens count as punctuation is decided from the gold tree: by preterminal
//! tag when the gold tree was read from labeled input, by surface form
//! otherwise. The predicted tree is compacted with the same mask, so both
//! always end up over the same token sequence.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::treebank::{Bracketing, Corpus, Sentence, Span, Tree};

/// `evalb` deletion labels (COLLINS.prm) plus bracket tags.
pub const PUNCT_TAGS: &[&str] = &[",", ":", "``", "''", ".", "-LRB-", "-RRB-", "-NONE-"];

/// Surface forms treated as punctuation when no tag is available.
pub const PUNCT_TOKENS: &[&str] = &[
    ",", ".", ":", ";", "?", "!", "...", "--", "``", "''", "`", "\"", "-LRB-", "-RRB-",
    "-LCB-", "-RCB-", "-LSB-", "-RSB-",
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Punctuation {
    pub tags: BTreeSet<String>,
    pub tokens: BTreeSet<String>,
}

impl Default for Punctuation {
    fn default() -> Self {
        Punctuation {
            tags: PUNCT_TAGS.iter().map(|s| s.to_string()).collect(),
            tokens: PUNCT_TOKENS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl Punctuation {
    /// No token is ever discarded.
    pub fn none() -> Self {
        Punctuation {
            tags: BTreeSet::new(),
            tokens: BTreeSet::new(),
        }
    }

    /// `true` for each token of `tree` that is discarded.
    pub fn mask(&self, tree: &Tree) -> Vec<bool> {
        let tags = tree.tags();
        tree.tokens()
            .iter()
            .enumerate()
            .map(|(i, tok)| match tags.map(|t| t[i].as_str()) {
                Some(tag) if !tag.is_empty() => self.tags.contains(tag),
                _ => self.tokens.contains(tok),
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalMode {
    /// Pool bracket counts over the corpus, then compute P/R/F1 (`evalb`).
    #[default]
    Corpus,
    /// Unweighted mean of per-sentence scores.
    Sentence,
}

impl std::str::FromStr for EvalMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "corpus" => Ok(EvalMode::Corpus),
            "sentence" => Ok(EvalMode::Sentence),
            other => Err(Error::config(format!(
                "unknown evaluation mode {other:?} (expected corpus or sentence)"
            ))),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct EvalConfig {
    pub mode: EvalMode,
    pub punctuation: Punctuation,
    /// Drop the whole-sentence bracket and any single-token brackets.
    pub exclude_trivial: bool,
    /// Only score sentences with at most this many tokens after punctuation removal.
    pub max_length: Option<usize>,
}

/// Removes discarded tokens and re-indexes spans.
///
/// Returns `None` when every token is discarded.
pub fn compact(tree: &Tree, discard: &[bool]) -> Option<Tree> {
    assert_eq!(discard.len(), tree.len(), "mask length differs from tree length");
    // new_index[i] = number of kept tokens before position i
    let mut new_index = Vec::with_capacity(tree.len() + 1);
    let mut kept = 0;
    for &d in discard {
        new_index.push(kept);
        if !d {
            kept += 1;
        }
    }
    new_index.push(kept);
    if kept == 0 {
        return None;
    }
    let tokens: Vec<String> = tree
        .tokens()
        .iter()
        .zip(discard)
        .filter(|(_, d)| !**d)
        .map(|(t, _)| t.clone())
        .collect();
    let tags = tree.tags().map(|tags| {
        tags.iter()
            .zip(discard)
            .filter(|(_, d)| !**d)
            .map(|(t, _)| t.clone())
            .collect::<Vec<_>>()
    });
    let spans = tree.spans().filter_map(|s| {
        let span = Span::new(new_index[s.begin], new_index[s.end]);
        (span.len() >= 2).then_some(span)
    });
    let bracketing = Bracketing::new(kept, spans).expect("compaction preserves nesting");
    let sentence = Sentence::new(tokens).expect("kept tokens are valid");
    Some(
        Tree::new(sentence, bracketing)
            .and_then(|t| t.with_tags(tags))
            .expect("lengths agree"),
    )
}

/// Drops punctuation tokens of `tree`; `None` for an all-punctuation sentence.
pub fn discard_punctuation(tree: &Tree, punctuation: &Punctuation) -> Option<Tree> {
    compact(tree, &punctuation.mask(tree))
}

/// Bracket counts for one sentence pair.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PairCounts {
    /// Tokens after punctuation removal.
    pub length: usize,
    pub matched: usize,
    pub gold: usize,
    pub predicted: usize,
}

impl PairCounts {
    pub fn precision(&self) -> f64 {
        ratio(self.matched, self.predicted)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.matched, self.gold)
    }

    pub fn f1(&self) -> f64 {
        f1(self.precision(), self.recall())
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        100.0 * num as f64 / den as f64
    }
}

/// Harmonic mean of two percentages; 0 when both are 0.
pub fn f1(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

fn brackets(b: &Bracketing, exclude_trivial: bool) -> BTreeSet<Span> {
    let root = b.root();
    b.spans()
        .filter(|s| {
            if exclude_trivial {
                *s != root && s.len() >= 2
            } else {
                *s == root || s.len() >= 2
            }
        })
        .collect()
}

/// Compares one predicted tree against gold; `None` if nothing is left after
/// punctuation removal.
pub fn score_pair(gold: &Tree, predicted: &Tree, config: &EvalConfig) -> Result<Option<PairCounts>> {
    if gold.tokens() != predicted.tokens() {
        return Err(Error::invalid(format!(
            "token mismatch: gold {:?} vs predicted {:?}",
            gold.sentence().to_string(),
            predicted.sentence().to_string()
        )));
    }
    let mask = config.punctuation.mask(gold);
    let (Some(g), Some(p)) = (compact(gold, &mask), compact(predicted, &mask)) else {
        return Ok(None);
    };
    let gb = brackets(g.bracketing(), config.exclude_trivial);
    let pb = brackets(p.bracketing(), config.exclude_trivial);
    Ok(Some(PairCounts {
        length: g.len(),
        matched: gb.intersection(&pb).count(),
        gold: gb.len(),
        predicted: pb.len(),
    }))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SentenceEval {
    pub index: usize,
    pub counts: PairCounts,
    pub f1: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvalResult {
    pub mode: EvalMode,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub matched: usize,
    pub gold: usize,
    pub predicted: usize,
    /// Sentences that were scored.
    pub sentences: Vec<SentenceEval>,
    /// Sentences left out (all punctuation or over the length cutoff).
    pub skipped: usize,
}

impl EvalResult {
    pub fn report(&self) -> String {
        let mut out = String::new();
        let mode = match self.mode {
            EvalMode::Corpus => "corpus",
            EvalMode::Sentence => "sentence-mean",
        };
        let _ = writeln!(out, "mode          {mode}");
        let _ = writeln!(out, "sentences     {}", self.sentences.len());
        let _ = writeln!(out, "skipped       {}", self.skipped);
        let _ = writeln!(out, "matched       {}", self.matched);
        let _ = writeln!(out, "gold          {}", self.gold);
        let _ = writeln!(out, "predicted     {}", self.predicted);
        let _ = writeln!(out, "precision     {:.2}", self.precision);
        let _ = writeln!(out, "recall        {:.2}", self.recall);
        let _ = writeln!(out, "f1            {:.2}", self.f1);
        out
    }

    /// Per-sentence counts: `index,length,matched,gold,predicted,f1`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,length,matched,gold,predicted,f1\n");
        for s in &self.sentences {
            let c = s.counts;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{:.4}",
                s.index, c.length, c.matched, c.gold, c.predicted, s.f1
            );
        }
        out
    }
}

/// Scores an aligned pair of corpora.
pub fn score_corpus(gold: &Corpus, predicted: &Corpus, config: &EvalConfig) -> Result<EvalResult> {
    if gold.len() != predicted.len() {
        return Err(Error::invalid(format!(
            "gold has {} trees, predicted has {}",
            gold.len(),
            predicted.len()
        )));
    }
    if gold.is_empty() {
        return Err(Error::invalid("cannot evaluate an empty corpus"));
    }
    let mut sentences = Vec::new();
    let mut skipped = 0;
    for (index, (g, p)) in gold.iter().zip(predicted.iter()).enumerate() {
        match score_pair(g, p, config)? {
            Some(counts) if config.max_length.is_none_or(|m| counts.length <= m) => {
                let f1 = if counts.gold == 0 && counts.predicted == 0 {
                    100.0
                } else {
                    counts.f1()
                };
                sentences.push(SentenceEval { index, counts, f1 });
            }
            _ => skipped += 1,
        }
    }
    let matched = sentences.iter().map(|s| s.counts.matched).sum();
    let gold_n = sentences.iter().map(|s| s.counts.gold).sum();
    let pred_n = sentences.iter().map(|s| s.counts.predicted).sum();
    let (precision, recall, f) = match config.mode {
        EvalMode::Corpus => {
            let p = ratio(matched, pred_n);
            let r = ratio(matched, gold_n);
            (p, r, f1(p, r))
        }
        EvalMode::Sentence => {
            let n = sentences.len().max(1) as f64;
            let empty = |c: &PairCounts| c.gold == 0 && c.predicted == 0;
            let p = sentences
                .iter()
                .map(|s| if empty(&s.counts) { 100.0 } else { s.counts.precision() })
                .sum::<f64>()
                / n;
            let r = sentences
                .iter()
                .map(|s| if empty(&s.counts) { 100.0 } else { s.counts.recall() })
                .sum::<f64>()
                / n;
            let f = sentences.iter().map(|s| s.f1).sum::<f64>() / n;
            (p, r, f)
        }
    };
    Ok(EvalResult {
        mode: config.mode,
        precision,
        recall,
        f1: f,
        matched,
        gold: gold_n,
        predicted: pred_n,
        sentences,
        skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tree(s: &str) -> Tree {
        Tree::from_bracketed(s).unwrap()
    }

    #[test]
    fn punctuation_removed() {
        let t = tree("(NT (NT a cat) .)");
        let d = discard_punctuation(&t, &Punctuation::default()).unwrap();
        assert_eq!(d.to_string(), "(NT a cat)");
        let t = tree("(NT (NT a cat) (NT is drinking milk))");
        assert_eq!(discard_punctuation(&t, &Punctuation::default()).unwrap(), t);
        assert!(discard_punctuation(&tree("(NT . ,)"), &Punctuation::default()).is_none());
    }

    #[test]
    fn tags_take_precedence_over_surface() {
        // "--" tagged as a noun stays, "." tagged as a symbol stays
        let t = tree("(S (NP (NN --) (NN x)) (SYM .))");
        let mask = Punctuation::default().mask(&t);
        assert_eq!(mask, vec![false, false, false]);
        let t = tree("(S (NP (DT a) (NN b)) (: ;))");
        assert_eq!(Punctuation::default().mask(&t), vec![false, false, true]);
    }

    #[test]
    fn right_branching_example() {
        let gold = tree("(NT (NT a cat) (NT is drinking milk))");
        let pred = tree("(NT a (NT cat (NT is (NT drinking milk))))");
        let c = score_pair(&gold, &pred, &EvalConfig::default()).unwrap().unwrap();
        assert_eq!((c.matched, c.gold, c.predicted), (2, 3, 4));
        assert!((c.precision() - 50.0).abs() < 1e-9);
        assert!((c.recall() - 200.0 / 3.0).abs() < 1e-9);
        assert!((c.f1() - 57.142857).abs() < 1e-5);
    }

    #[test]
    fn flat_prediction_matches_root_only() {
        let gold = tree("(NT (NT a cat) (NT is (NT drinking milk)))");
        let pred = Tree::flat(gold.sentence().clone());
        let c = score_pair(&gold, &pred, &EvalConfig::default()).unwrap().unwrap();
        assert_eq!(c.matched, 1);
        assert!((c.recall() - 25.0).abs() < 1e-9);
    }

    #[test]
    fn token_mismatch_is_error() {
        let a = tree("(NT a b)");
        let b = tree("(NT a c)");
        assert!(score_pair(&a, &b, &EvalConfig::default()).is_err());
    }

    #[test]
    fn corpus_vs_sentence_mode() {
        let g1 = tree("(NT (NT a b) c)");
        let g2 = tree("(NT (NT a b) (NT c d))");
        let p2 = tree("(NT a (NT b c) d)");
        let gold = Corpus::new(vec![g1.clone()]);
        let corpus = score_corpus(&gold, &gold, &EvalConfig::default()).unwrap();
        let sent = score_corpus(
            &gold,
            &gold,
            &EvalConfig {
                mode: EvalMode::Sentence,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(corpus.f1, sent.f1);

        let gold = Corpus::new(vec![g1.clone(), g2]);
        let pred = Corpus::new(vec![g1, p2]);
        let cfg = EvalConfig {
            exclude_trivial: true,
            ..Default::default()
        };
        let corpus = score_corpus(&gold, &pred, &cfg).unwrap();
        // pooled: matched 1, gold 3, predicted 2
        assert!((corpus.precision - 50.0).abs() < 1e-9);
        assert!((corpus.recall - 100.0 / 3.0).abs() < 1e-9);
        assert!((corpus.f1 - 40.0).abs() < 1e-9);
        let sent = score_corpus(
            &gold,
            &pred,
            &EvalConfig {
                mode: EvalMode::Sentence,
                ..cfg
            },
        )
        .unwrap();
        assert!((sent.f1 - 50.0).abs() < 1e-9);
    }

    #[test]
    fn empty_and_mismatched_corpora() {
        let cfg = EvalConfig::default();
        assert!(score_corpus(&Corpus::default(), &Corpus::default(), &cfg).is_err());
        let a = Corpus::new(vec![tree("(NT a b)")]);
        assert!(score_corpus(&a, &Corpus::default(), &cfg).is_err());
    }

    #[test]
    fn length_cutoff_and_all_punct() {
        let gold = Corpus::new(vec![tree("(NT a b c .)"), tree("(NT . .)"), tree("(NT a b)")]);
        let cfg = EvalConfig {
            max_length: Some(2),
            ..Default::default()
        };
        let r = score_corpus(&gold, &gold, &cfg).unwrap();
        assert_eq!(r.sentences.len(), 1);
        assert_eq!(r.skipped, 2);
        assert_eq!(r.f1, 100.0);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let gold = Corpus::new(vec![tree("(NT a b)"), tree("(NT (NT a b) c)")]);
        let r = score_corpus(&gold, &gold, &EvalConfig::default()).unwrap();
        let csv = r.to_csv();
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.starts_with("index,length,matched,gold,predicted,f1\n"));
        assert!(r.report().contains("f1            100.00"));
    }
}
