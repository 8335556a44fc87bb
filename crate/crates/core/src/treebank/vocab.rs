use std::collections::HashMap;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::{Corpus, Sentence};
use crate::error::{Error, Result};

pub const PAD: &str = "<pad>";
pub const UNK: &str = "<unk>";
pub const NUM: &str = "<num>";
pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";

const SPECIALS: [&str; 5] = [PAD, UNK, NUM, BOS, EOS];

static NUMERIC: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^[+-]?[0-9]+(\.[0-9]+)?$").expect("valid regex"));

/// Optional sign, digits, optional decimal part; commas are ignored.
pub fn is_numeric(token: &str) -> bool {
    let stripped: String = token.chars().filter(|&c| c != ',').collect();
    NUMERIC.is_match(&stripped)
}

pub fn normalize_token(token: &str) -> String {
    if is_numeric(token) {
        NUM.to_string()
    } else {
        token.to_string()
    }
}

/// Replaces numeric tokens by [`NUM`].
pub fn normalize_numbers(sentence: &Sentence) -> Sentence {
    Sentence::from_tokens_unchecked(sentence.normalized())
}

/// Frequency-ranked token index. Ids `0..5` are the special tokens.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, u32>,
}

impl TryFrom<Vec<String>> for Vocabulary {
    type Error = String;

    fn try_from(tokens: Vec<String>) -> std::result::Result<Self, String> {
        if tokens.len() < SPECIALS.len() || tokens[..SPECIALS.len()] != SPECIALS {
            return Err("vocabulary does not start with the special tokens".into());
        }
        let mut vocab = Vocabulary {
            tokens,
            index: HashMap::new(),
        };
        vocab.rebuild_index();
        if vocab.index.len() != vocab.tokens.len() {
            return Err("duplicate vocabulary entries".into());
        }
        Ok(vocab)
    }
}

impl From<Vocabulary> for Vec<String> {
    fn from(v: Vocabulary) -> Self {
        v.tokens
    }
}

impl Vocabulary {
    pub fn from_tokens(words: impl IntoIterator<Item = String>) -> Self {
        let mut tokens: Vec<String> = SPECIALS.iter().map(|s| s.to_string()).collect();
        for w in words {
            if !SPECIALS.contains(&w.as_str()) {
                tokens.push(w);
            }
        }
        let mut vocab = Vocabulary {
            tokens,
            index: HashMap::new(),
        };
        vocab.rebuild_index();
        vocab
    }

    fn rebuild_index(&mut self) {
        self.index = self
            .tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.index.get(token).copied()
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.tokens.get(id as usize).map(String::as_str)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn unk_id(&self) -> u32 {
        1
    }

    pub fn num_id(&self) -> u32 {
        2
    }

    pub fn bos_id(&self) -> u32 {
        3
    }

    pub fn eos_id(&self) -> u32 {
        4
    }

    /// Maps a sentence to ids: numbers become [`NUM`], unknown tokens [`UNK`].
    pub fn encode(&self, sentence: &Sentence) -> Vec<u32> {
        sentence
            .tokens()
            .iter()
            .map(|t| self.id(&normalize_token(t)).unwrap_or(self.unk_id()))
            .collect()
    }
}

/// Keeps the `size_cap` most frequent normalized tokens.
pub fn build_vocabulary(corpus: &Corpus, size_cap: usize) -> Result<Vocabulary> {
    let sentences: Vec<&Sentence> = corpus.iter().map(|t| t.sentence()).collect();
    build_vocabulary_from_sentences(sentences, size_cap)
}

/// Like [`build_vocabulary`] over bare sentences. Ties go to the token seen first.
pub fn build_vocabulary_from_sentences<'a>(
    sentences: impl IntoIterator<Item = &'a Sentence>,
    size_cap: usize,
) -> Result<Vocabulary> {
    if size_cap == 0 {
        return Err(Error::config("vocabulary size cap must be positive"));
    }
    // token -> (count, first occurrence)
    let mut counts: HashMap<String, (usize, usize)> = HashMap::new();
    let mut seen = 0usize;
    for sentence in sentences {
        for tok in sentence.tokens() {
            let tok = normalize_token(tok);
            if SPECIALS.contains(&tok.as_str()) {
                continue;
            }
            counts.entry(tok).or_insert((0, seen)).0 += 1;
            seen += 1;
        }
    }
    let mut ranked: Vec<(String, usize, usize)> =
        counts.into_iter().map(|(t, (c, first))| (t, c, first)).collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.2.cmp(&b.2)));
    ranked.truncate(size_cap);
    Ok(Vocabulary::from_tokens(ranked.into_iter().map(|(t, _, _)| t)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::treebank::Tree;

    fn sent(s: &str) -> Sentence {
        Sentence::from_raw_line(s).unwrap()
    }

    #[test]
    fn numeric_rule() {
        for t in ["1", "3.5", "1,200", "-7", "+2", "120.5", "1,000,000.25"] {
            assert!(is_numeric(t), "{t}");
        }
        for t in ["a1", "1.", ".5", "1e5", "-", ",", "one", "1-2", "<num>"] {
            assert!(!is_numeric(t), "{t}");
        }
    }

    #[test]
    fn normalize_examples() {
        let s = normalize_numbers(&sent("the index fell 120.5 points"));
        assert_eq!(s.tokens(), &["the", "index", "fell", NUM, "points"]);
        let s = sent("no numbers here");
        assert_eq!(normalize_numbers(&s), s);
        let s = sent(NUM);
        assert_eq!(normalize_numbers(&s), s);
    }

    fn corpus(lines: &[&str]) -> Corpus {
        lines
            .iter()
            .map(|l| Tree::flat(sent(l)))
            .collect()
    }

    #[test]
    fn frequency_cap() {
        let c = corpus(&["a a a b c", "a b a b"]);
        let v = build_vocabulary(&c, 2).unwrap();
        assert_eq!(&v.tokens()[5..], &["a", "b"]);
        assert_eq!(v.len(), 7);
    }

    #[test]
    fn tie_break_first_seen() {
        let c = corpus(&["b a a b"]);
        let v = build_vocabulary(&c, 1).unwrap();
        assert_eq!(&v.tokens()[5..], &["b"]);
        let c = corpus(&["a b b a"]);
        let v = build_vocabulary(&c, 1).unwrap();
        assert_eq!(&v.tokens()[5..], &["a"]);
    }

    #[test]
    fn large_cap_keeps_everything() {
        let c = corpus(&["x y z 12", "y 3"]);
        let v = build_vocabulary(&c, usize::MAX).unwrap();
        assert_eq!(&v.tokens()[5..], &["y", "x", "z"]);
    }

    #[test]
    fn zero_cap_is_error() {
        assert!(build_vocabulary(&corpus(&["a"]), 0).is_err());
    }

    #[test]
    fn encode_maps_unknowns() {
        let v = build_vocabulary(&corpus(&["a"]), 10).unwrap();
        let a = v.id("a").unwrap();
        assert_eq!(v.encode(&sent("a zzz")), vec![a, v.unk_id()]);
        assert_eq!(v.encode(&sent("a a")), vec![a, a]);
        assert_eq!(v.encode(&sent(NUM)), vec![v.num_id()]);
        assert_eq!(v.encode(&sent("1,500")), vec![v.num_id()]);
    }
}
