//! Sentences, unlabeled trees and treebank files.
//!
//! A [`Tree`] is a tokenized [`Sentence`] plus a [`Bracketing`]: the set of
//! constituent spans over the sentence. Only spans of two or more tokens are
//! materialized, together with the root span `(0, L)` which is always
//! present. Preterminal (part-of-speech) layers of labeled input are kept as
//! per-token tags so punctuation can be identified later, but they never
//! produce constituents.

mod bracket;
mod vocab;

use std::collections::BTreeSet;
use std::fmt;
use std::ops::Range;

pub use bracket::{read_raw_sentences, read_treebank, write_treebank};
pub use vocab::{
    build_vocabulary, build_vocabulary_from_sentences, is_numeric, normalize_numbers,
    normalize_token, Vocabulary, BOS, EOS, NUM, PAD, UNK,
};

use crate::error::{Error, Result};

/// Escaped form of a literal `(` inside a token.
pub const LRB: &str = "-LRB-";
/// Escaped form of a literal `)` inside a token.
pub const RRB: &str = "-RRB-";

/// A non-empty sequence of whitespace-free tokens.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Sentence {
    tokens: Vec<String>,
}

impl Sentence {
    pub fn new<S: Into<String>>(tokens: impl IntoIterator<Item = S>) -> Result<Self> {
        let tokens: Vec<String> = tokens.into_iter().map(Into::into).collect();
        if tokens.is_empty() {
            return Err(Error::invalid("empty sentence"));
        }
        for tok in &tokens {
            if tok.is_empty()
                || tok.chars().any(|c| c.is_whitespace() || c == '(' || c == ')')
            {
                return Err(Error::invalid(format!("invalid token {tok:?}")));
            }
        }
        Ok(Sentence { tokens })
    }

    /// Splits a pre-tokenized line on whitespace, escaping literal parentheses.
    pub fn from_raw_line(line: &str) -> Result<Self> {
        Sentence::new(line.split_whitespace().map(|tok| {
            tok.replace('(', LRB).replace(')', RRB)
        }))
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Tokens after number normalization.
    pub fn normalized(&self) -> Vec<String> {
        self.tokens.iter().map(|t| normalize_token(t)).collect()
    }

    pub(crate) fn from_tokens_unchecked(tokens: Vec<String>) -> Self {
        debug_assert!(!tokens.is_empty());
        Sentence { tokens }
    }
}

impl fmt::Display for Sentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tokens.join(" "))
    }
}

/// Half-open token interval `[begin, end)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Span {
    pub begin: usize,
    pub end: usize,
}

impl Span {
    pub const fn new(begin: usize, end: usize) -> Self {
        Span { begin, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.begin
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.begin
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.begin <= other.begin && other.end <= self.end
    }

    pub fn crosses(&self, other: &Span) -> bool {
        (self.begin < other.begin && other.begin < self.end && self.end < other.end)
            || (other.begin < self.begin && self.begin < other.end && other.end < self.end)
    }

    pub fn range(&self) -> Range<usize> {
        self.begin..self.end
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.begin, self.end)
    }
}

impl From<(usize, usize)> for Span {
    fn from((begin, end): (usize, usize)) -> Self {
        Span { begin, end }
    }
}

/// One position inside a constituent: either a bare token or a sub-constituent.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Child {
    Token(usize),
    Constituent(Span),
}

/// The span structure of an unlabeled tree over a sentence of known length.
///
/// Spans are a set: stacked unary brackets over the same tokens are one span.
/// The root span is always present, no two spans cross, and every span
/// below the root covers at least two tokens.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Bracketing {
    len: usize,
    spans: BTreeSet<Span>,
}

impl Bracketing {
    /// Builds a bracketing, adding the root span if it is missing.
    pub fn new(len: usize, spans: impl IntoIterator<Item = Span>) -> Result<Self> {
        if len == 0 {
            return Err(Error::InvalidTree("sentence length 0".into()));
        }
        let mut set = BTreeSet::new();
        set.insert(Span::new(0, len));
        for span in spans {
            if span.is_empty() || span.end > len {
                return Err(Error::InvalidTree(format!(
                    "span {span} out of range for length {len}"
                )));
            }
            if span.len() == 1 && span.end - span.begin != len {
                return Err(Error::InvalidTree(format!(
                    "single-token span {span} below the root"
                )));
            }
            set.insert(span);
        }
        let bracketing = Bracketing { len, spans: set };
        if let Some((a, b)) = bracketing.find_crossing() {
            return Err(Error::InvalidTree(format!("crossing spans {a} and {b}")));
        }
        Ok(bracketing)
    }

    /// Root-only bracketing, i.e. the flat tree.
    pub fn flat(len: usize) -> Self {
        assert!(len > 0, "flat bracketing needs at least one token");
        Bracketing {
            len,
            spans: BTreeSet::from([Span::new(0, len)]),
        }
    }

    pub fn sentence_len(&self) -> usize {
        self.len
    }

    pub fn root(&self) -> Span {
        Span::new(0, self.len)
    }

    /// All spans including the root, in `(begin, end)` order.
    pub fn spans(&self) -> impl Iterator<Item = Span> + '_ {
        self.spans.iter().copied()
    }

    pub fn span_count(&self) -> usize {
        self.spans.len()
    }

    pub fn contains(&self, span: Span) -> bool {
        self.spans.contains(&span)
    }

    /// Spans of length ≥ 2 other than the root.
    pub fn constituents(&self) -> impl Iterator<Item = Span> + '_ {
        let root = self.root();
        self.spans
            .iter()
            .copied()
            .filter(move |s| *s != root && s.len() >= 2)
    }

    /// First pair of crossing spans, if any.
    pub fn find_crossing(&self) -> Option<(Span, Span)> {
        let mut sorted: Vec<Span> = self.spans.iter().copied().collect();
        sorted.sort_by(|a, b| a.begin.cmp(&b.begin).then(b.end.cmp(&a.end)));
        let mut stack: Vec<Span> = Vec::new();
        for span in sorted {
            while let Some(top) = stack.last() {
                if top.end <= span.begin {
                    stack.pop();
                } else {
                    break;
                }
            }
            if let Some(top) = stack.last() {
                if span.end > top.end {
                    return Some((*top, span));
                }
            }
            stack.push(span);
        }
        None
    }

    /// Immediate children of `parent`, left to right.
    pub fn children(&self, parent: Span) -> Vec<Child> {
        let mut out = Vec::new();
        let mut i = parent.begin;
        while i < parent.end {
            let child = self
                .spans
                .range(Span::new(i, i + 1)..=Span::new(i, parent.end))
                .rev()
                .find(|s| **s != parent)
                .copied();
            match child {
                Some(span) => {
                    out.push(Child::Constituent(span));
                    i = span.end;
                }
                None => {
                    out.push(Child::Token(i));
                    i += 1;
                }
            }
        }
        out
    }
}

/// A sentence with its unlabeled constituency structure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tree {
    sentence: Sentence,
    bracketing: Bracketing,
    /// Preterminal labels from labeled input; empty strings for untagged tokens.
    tags: Option<Vec<String>>,
}

impl Tree {
    pub fn new(sentence: Sentence, bracketing: Bracketing) -> Result<Self> {
        if sentence.len() != bracketing.sentence_len() {
            return Err(Error::InvalidTree(format!(
                "sentence has {} tokens but bracketing covers {}",
                sentence.len(),
                bracketing.sentence_len()
            )));
        }
        Ok(Tree {
            sentence,
            bracketing,
            tags: None,
        })
    }

    pub fn from_spans(
        sentence: Sentence,
        spans: impl IntoIterator<Item = Span>,
    ) -> Result<Self> {
        let bracketing = Bracketing::new(sentence.len(), spans)?;
        Tree::new(sentence, bracketing)
    }

    pub fn flat(sentence: Sentence) -> Self {
        let bracketing = Bracketing::flat(sentence.len());
        Tree {
            sentence,
            bracketing,
            tags: None,
        }
    }

    pub fn with_tags(mut self, tags: Option<Vec<String>>) -> Result<Self> {
        if let Some(t) = &tags {
            if t.len() != self.sentence.len() {
                return Err(Error::InvalidTree("tag count differs from token count".into()));
            }
        }
        self.tags = tags;
        Ok(self)
    }

    /// Parses a single bracketed tree such as `(S (NP a cat) (VP sleeps))`.
    pub fn from_bracketed(text: &str) -> Result<Self> {
        bracket::parse_tree(text).map_err(|message| Error::Parse { line: 1, message })
    }

    pub fn sentence(&self) -> &Sentence {
        &self.sentence
    }

    pub fn tokens(&self) -> &[String] {
        self.sentence.tokens()
    }

    pub fn len(&self) -> usize {
        self.sentence.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentence.is_empty()
    }

    pub fn bracketing(&self) -> &Bracketing {
        &self.bracketing
    }

    pub fn tags(&self) -> Option<&[String]> {
        self.tags.as_deref()
    }

    pub fn spans(&self) -> impl Iterator<Item = Span> + '_ {
        self.bracketing.spans()
    }

    pub fn into_parts(self) -> (Sentence, Bracketing, Option<Vec<String>>) {
        (self.sentence, self.bracketing, self.tags)
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        bracket::write_node(f, self, self.bracketing.root())
    }
}

/// An ordered collection of trees.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Corpus {
    trees: Vec<Tree>,
}

impl Corpus {
    pub fn new(trees: Vec<Tree>) -> Self {
        Corpus { trees }
    }

    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    pub fn into_trees(self) -> Vec<Tree> {
        self.trees
    }

    pub fn len(&self) -> usize {
        self.trees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trees.is_empty()
    }

    pub fn push(&mut self, tree: Tree) {
        self.trees.push(tree);
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Tree> {
        self.trees.iter()
    }

    pub fn sentences(&self) -> Vec<Sentence> {
        self.trees.iter().map(|t| t.sentence().clone()).collect()
    }

    /// The first `n` trees (all of them if `n` exceeds the size).
    pub fn take_first(&self, n: usize) -> Corpus {
        Corpus::new(self.trees.iter().take(n).cloned().collect())
    }

    /// Splits into `(first n, rest)`.
    pub fn split_at(&self, n: usize) -> (Corpus, Corpus) {
        let n = n.min(self.trees.len());
        let (a, b) = self.trees.split_at(n);
        (Corpus::new(a.to_vec()), Corpus::new(b.to_vec()))
    }

    /// Applies number normalization to every sentence, keeping structure and tags.
    pub fn normalize_numbers(&self) -> Corpus {
        Corpus::new(
            self.trees
                .iter()
                .map(|t| Tree {
                    sentence: normalize_numbers(&t.sentence),
                    bracketing: t.bracketing.clone(),
                    tags: t.tags.clone(),
                })
                .collect(),
        )
    }
}

impl FromIterator<Tree> for Corpus {
    fn from_iter<I: IntoIterator<Item = Tree>>(iter: I) -> Self {
        Corpus::new(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a Corpus {
    type Item = &'a Tree;
    type IntoIter = std::slice::Iter<'a, Tree>;

    fn into_iter(self) -> Self::IntoIter {
        self.trees.iter()
    }
}

impl IntoIterator for Corpus {
    type Item = Tree;
    type IntoIter = std::vec::IntoIter<Tree>;

    fn into_iter(self) -> Self::IntoIter {
        self.trees.into_iter()
    }
}
