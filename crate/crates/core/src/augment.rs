//! Subtree substitution (SUB).
//!
//! A generated example takes a tree, picks one of its constituents, and swaps
//! that constituent's tokens and internal structure for those of a constituent
//! taken from another training tree. Grammaticality is not checked.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::treebank::{Bracketing, Corpus, Sentence, Span, Tree};

/// Where replacement subtrees come from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SourcePolicy {
    /// Only the original corpus.
    #[default]
    Original,
    /// The growing augmented corpus, generated trees included.
    Augmented,
}

impl std::str::FromStr for SourcePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "original" => Ok(SourcePolicy::Original),
            "augmented" => Ok(SourcePolicy::Augmented),
            other => Err(Error::config(format!(
                "unknown source policy {other:?} (expected original or augmented)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AugmentConfig {
    /// Size of the output corpus, originals included.
    pub target_size: usize,
    pub seed: u64,
    pub source: SourcePolicy,
    /// Generated sentences longer than this are rejected.
    pub max_len: usize,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        AugmentConfig {
            target_size: 10_000,
            seed: 0,
            source: SourcePolicy::Original,
            max_len: 60,
        }
    }
}

/// Rejected draws allowed per requested output tree.
pub const RETRIES_PER_ITEM: usize = 1000;

/// Replaces `target_span` of `target` by `source_span` of `source`.
///
/// Spans inside the target constituent are dropped, the constituent itself is
/// resized, enclosing spans are stretched, and spans to its right are
/// shifted. The source constituent's internal spans are carried over.
pub fn substitute(
    target: &Tree,
    target_span: Span,
    source: &Tree,
    source_span: Span,
    max_len: usize,
) -> Result<Tree> {
    if !target.bracketing().contains(target_span) {
        return Err(Error::Rejected(format!("{target_span} is not a constituent of the target")));
    }
    if target_span == target.bracketing().root() {
        return Err(Error::Rejected("the root span cannot be replaced".into()));
    }
    if !source.bracketing().contains(source_span) {
        return Err(Error::Rejected(format!("{source_span} is not a constituent of the source")));
    }
    if source_span.len() < 2 {
        return Err(Error::Rejected("single-token source span".into()));
    }
    let new_len = target.len() - target_span.len() + source_span.len();
    if new_len > max_len {
        return Err(Error::Rejected(format!(
            "generated sentence has {new_len} tokens, limit is {max_len}"
        )));
    }

    let (b, e) = (target_span.begin, target_span.end);
    let (sb, se) = (source_span.begin, source_span.end);
    let shift = |i: usize| i + source_span.len() - target_span.len();

    let mut tokens = Vec::with_capacity(new_len);
    tokens.extend_from_slice(&target.tokens()[..b]);
    tokens.extend_from_slice(&source.tokens()[sb..se]);
    tokens.extend_from_slice(&target.tokens()[e..]);

    let tags = match (target.tags(), source.tags()) {
        (None, None) => None,
        (t, s) => {
            let blank = |n: usize| vec![String::new(); n];
            let t = t.map(<[String]>::to_vec).unwrap_or_else(|| blank(target.len()));
            let s = s.map(<[String]>::to_vec).unwrap_or_else(|| blank(source.len()));
            let mut out = Vec::with_capacity(new_len);
            out.extend_from_slice(&t[..b]);
            out.extend_from_slice(&s[sb..se]);
            out.extend_from_slice(&t[e..]);
            Some(out)
        }
    };

    let mut spans = vec![Span::new(b, b + source_span.len())];
    for s in target.spans() {
        if s == target_span || (s.begin >= b && s.end <= e) {
            continue;
        }
        if s.end <= b {
            spans.push(s);
        } else if s.begin >= e {
            spans.push(Span::new(shift(s.begin), shift(s.end)));
        } else {
            spans.push(Span::new(s.begin, shift(s.end)));
        }
    }
    for s in source.spans() {
        if s != source_span && s.begin >= sb && s.end <= se {
            spans.push(Span::new(s.begin - sb + b, s.end - sb + b));
        }
    }

    let sentence = Sentence::new(tokens)?;
    let bracketing = Bracketing::new(new_len, spans)?;
    Tree::new(sentence, bracketing)?.with_tags(tags)
}

/// Source of uniform draws; `index(n)` returns a value in `0..n`.
pub trait Sampler {
    fn index(&mut self, n: usize) -> usize;
}

/// Uniform draws from a seeded generator.
pub struct RngSampler<R>(pub R);

impl<R: Rng> Sampler for RngSampler<R> {
    fn index(&mut self, n: usize) -> usize {
        self.0.gen_range(0..n)
    }
}

/// Replays a fixed list of draws, then panics when exhausted.
pub struct ForcedDraws(pub VecDeque<usize>);

impl Sampler for ForcedDraws {
    fn index(&mut self, n: usize) -> usize {
        let i = self.0.pop_front().expect("forced draws exhausted");
        assert!(i < n, "forced draw {i} out of range 0..{n}");
        i
    }
}

/// Constituents a tree offers as substitution targets, in span order.
pub fn target_spans(tree: &Tree) -> Vec<Span> {
    tree.bracketing().constituents().collect()
}

/// Constituents a tree offers as sources (root included), in span order.
pub fn source_spans(tree: &Tree) -> Vec<Span> {
    tree.spans().filter(|s| s.len() >= 2).collect()
}

/// Grows `base` to `config.target_size` trees with seeded SUB draws.
pub fn augment_corpus(base: &Corpus, config: &AugmentConfig) -> Result<Corpus> {
    let mut sampler = RngSampler(ChaCha8Rng::seed_from_u64(config.seed));
    augment_corpus_with(base, config, &mut sampler)
}

/// Like [`augment_corpus`], with draws taken from `sampler`.
///
/// Each attempt draws, in order: a target tree from the current corpus, a
/// target span from [`target_spans`], a source tree, and a source span from
/// [`source_spans`].
pub fn augment_corpus_with<S: Sampler>(
    base: &Corpus,
    config: &AugmentConfig,
    sampler: &mut S,
) -> Result<Corpus> {
    if base.is_empty() {
        return Err(Error::invalid("cannot augment an empty corpus"));
    }
    if config.max_len == 0 {
        return Err(Error::config("max_len must be at least 1"));
    }
    if config.target_size < base.len() {
        return Err(Error::config(format!(
            "target size {} is smaller than the corpus ({} trees)",
            config.target_size,
            base.len()
        )));
    }
    let mut out: Vec<Tree> = base.trees().to_vec();
    if out.len() == config.target_size {
        return Ok(Corpus::new(out));
    }
    if base.iter().all(|t| target_spans(t).is_empty()) {
        return Err(Error::invalid(
            "no tree has a non-root constituent to replace",
        ));
    }

    let budget = RETRIES_PER_ITEM * config.target_size;
    let mut attempts = 0;
    while out.len() < config.target_size {
        attempts += 1;
        if attempts > budget {
            return Err(Error::invalid(format!(
                "gave up after {budget} draws with {} of {} trees generated",
                out.len(),
                config.target_size
            )));
        }
        let target = &out[sampler.index(out.len())];
        let targets = target_spans(target);
        if targets.is_empty() {
            continue;
        }
        let target_span = targets[sampler.index(targets.len())];
        let pool = match config.source {
            SourcePolicy::Original => base.len(),
            SourcePolicy::Augmented => out.len(),
        };
        let source = &out[sampler.index(pool)];
        let sources = source_spans(source);
        if sources.is_empty() {
            continue;
        }
        let source_span = sources[sampler.index(sources.len())];
        match substitute(target, target_span, source, source_span, config.max_len) {
            Ok(tree) => out.push(tree),
            Err(Error::Rejected(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(Corpus::new(out))
}
