//! A seeded, English-like probabilistic grammar that produces labeled trees.
//!
//! Output is PTB-style bracketed text with phrase labels and POS tags, so it
//! exercises the same reader path as a real treebank (preterminal and unary
//! collapse, punctuation tags, numbers).

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::treebank::{Corpus, Tree};

const DT: &[&str] = &["the", "a", "this", "that", "every", "some", "no", "each"];
const NN: &[&str] = &[
    "cat", "dog", "student", "teacher", "house", "river", "market", "report", "company",
    "city", "car", "window", "letter", "farmer", "child", "garden", "bank", "road", "song",
    "doctor", "plan", "table", "book", "team", "game", "manager", "price", "village", "ship",
    "girl", "boy", "friend", "story", "picture", "kitchen", "meeting", "storm", "bridge",
];
const NNS: &[&str] = &[
    "cats", "dogs", "students", "teachers", "houses", "markets", "reports", "companies",
    "cars", "letters", "farmers", "children", "gardens", "roads", "songs", "doctors",
    "plans", "books", "teams", "prices", "villages", "ships", "friends", "stories", "shares",
    "workers", "investors", "kittens",
];
const NNP: &[&str] = &[
    "John", "Mary", "Paris", "London", "Smith", "Alice", "Tokyo", "Boston", "Maria", "Peter",
    "Chen", "Ortiz", "Kumar", "Berlin",
];
const PRP: &[&str] = &["he", "she", "it", "they", "we", "I", "you"];
const JJ: &[&str] = &[
    "big", "small", "old", "new", "red", "quiet", "happy", "strange", "early", "late", "young",
    "bright", "dark", "long", "short", "green", "local", "famous", "cheap", "tired", "several",
];
const RB: &[&str] = &["very", "quite", "rather", "really", "too", "so"];
const VBD: &[&str] = &[
    "saw", "found", "liked", "built", "wrote", "sold", "bought", "watched", "visited", "met",
    "painted", "opened", "closed", "carried", "helped", "called", "followed", "moved", "took",
    "made",
];
const VBD_INTR: &[&str] = &["slept", "arrived", "left", "laughed", "fell", "rose", "waited", "smiled"];
const VBD_SAY: &[&str] = &["said", "thought", "believed", "knew", "reported"];
const VBZ: &[&str] = &["is", "seems", "looks", "remains", "becomes"];
const MD: &[&str] = &["will", "can", "might", "should", "must", "could"];
const VB: &[&str] = &[
    "see", "find", "like", "build", "write", "sell", "buy", "watch", "visit", "meet", "open",
    "help", "follow", "take", "make",
];
const IN: &[&str] = &["in", "on", "with", "near", "under", "from", "by", "about", "after", "behind"];
const CC: &[&str] = &["and", "but"];

enum Node {
    Phrase(&'static str, Vec<Node>),
    Word(&'static str, String),
}

impl Node {
    fn write(&self, out: &mut String) {
        match self {
            Node::Word(tag, w) => {
                out.push('(');
                out.push_str(tag);
                out.push(' ');
                out.push_str(w);
                out.push(')');
            }
            Node::Phrase(label, kids) => {
                out.push('(');
                out.push_str(label);
                for k in kids {
                    out.push(' ');
                    k.write(out);
                }
                out.push(')');
            }
        }
    }

    fn leaves(&self) -> usize {
        match self {
            Node::Word(..) => 1,
            Node::Phrase(_, kids) => kids.iter().map(Node::leaves).sum(),
        }
    }
}

struct Generator {
    rng: ChaCha8Rng,
}

impl Generator {
    fn word(&mut self, tag: &'static str, words: &[&'static str]) -> Node {
        Node::Word(tag, words.choose(&mut self.rng).expect("non-empty lexicon").to_string())
    }

    fn number(&mut self) -> Node {
        let text = match self.rng.gen_range(0..4) {
            0 => self.rng.gen_range(2..20).to_string(),
            1 => format!("{},{:03}", self.rng.gen_range(1..99), self.rng.gen_range(0..1000)),
            2 => format!("{}.{}", self.rng.gen_range(1..100), self.rng.gen_range(0..10)),
            _ => self.rng.gen_range(1900..2030).to_string(),
        };
        Node::Word("CD", text)
    }

    fn chance(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p)
    }

    fn sentence(&mut self, depth: usize) -> Node {
        let mut kids = Vec::new();
        if depth == 0 && self.chance(0.15) {
            kids.push(self.pp(depth + 1));
            kids.push(Node::Word(",", ",".into()));
        }
        kids.push(self.np(depth + 1));
        kids.push(self.vp(depth + 1));
        if depth == 0 && self.chance(0.12) {
            let clause = Node::Phrase("S", vec![self.np(depth + 2), self.vp(depth + 2)]);
            kids.push(Node::Word(",", ",".into()));
            kids.push(self.word("CC", CC));
            kids.push(clause);
        }
        if depth == 0 && self.chance(0.85) {
            kids.push(Node::Word(".", ".".into()));
        }
        Node::Phrase("S", kids)
    }

    fn np(&mut self, depth: usize) -> Node {
        let base = match self.rng.gen_range(0..100) {
            0..=34 => Node::Phrase("NP", vec![self.word("DT", DT), self.word("NN", NN)]),
            35..=52 => {
                let mut k = vec![self.word("DT", DT)];
                if self.chance(0.2) {
                    k.push(Node::Phrase("ADJP", vec![self.word("RB", RB), self.word("JJ", JJ)]));
                } else {
                    k.push(self.word("JJ", JJ));
                }
                k.push(self.word("NN", NN));
                Node::Phrase("NP", k)
            }
            53..=62 => Node::Phrase("NP", vec![self.word("PRP", PRP)]),
            63..=72 => Node::Phrase("NP", vec![self.word("NNP", NNP)]),
            73..=80 => Node::Phrase("NP", vec![self.number(), self.word("NNS", NNS)]),
            81..=88 => Node::Phrase("NP", vec![self.word("JJ", JJ), self.word("NNS", NNS)]),
            89..=94 => Node::Phrase("NP", vec![self.word("NNP", NNP), self.word("NNP", NNP)]),
            _ => Node::Phrase("NP", vec![self.word("DT", DT), self.word("NN", NN), self.word("NN", NN)]),
        };
        let p_pp = 0.3 / depth as f64;
        if self.chance(p_pp.min(0.3)) {
            Node::Phrase("NP", vec![base, self.pp(depth + 1)])
        } else {
            base
        }
    }

    fn pp(&mut self, depth: usize) -> Node {
        Node::Phrase("PP", vec![self.word("IN", IN), self.np(depth + 1)])
    }

    fn vp(&mut self, depth: usize) -> Node {
        let deep = depth > 3;
        let r = self.rng.gen_range(0..100);
        let mut kids = match r {
            0..=39 => vec![self.word("VBD", VBD), self.np(depth + 1)],
            40..=51 => vec![self.word("VBD", VBD_INTR)],
            52..=63 => {
                let adj = if self.chance(0.4) {
                    Node::Phrase("ADJP", vec![self.word("RB", RB), self.word("JJ", JJ)])
                } else {
                    Node::Phrase("ADJP", vec![self.word("JJ", JJ)])
                };
                vec![self.word("VBZ", VBZ), adj]
            }
            64..=79 => {
                let inner = Node::Phrase("VP", vec![self.word("VB", VB), self.np(depth + 2)]);
                vec![self.word("MD", MD), inner]
            }
            _ if !deep => {
                let clause = self.sentence(depth + 1);
                let sbar = if self.chance(0.6) {
                    Node::Phrase("SBAR", vec![Node::Word("IN", "that".into()), clause])
                } else {
                    Node::Phrase("SBAR", vec![clause])
                };
                vec![self.word("VBD", VBD_SAY), sbar]
            }
            _ => vec![self.word("VBD", VBD), self.np(depth + 1)],
        };
        if self.chance(0.25 / depth as f64) {
            kids.push(self.pp(depth + 1));
        }
        Node::Phrase("VP", kids)
    }
}

/// `n` bracketed trees with phrase labels and POS tags, each with 2 to
/// `max_len` tokens.
pub fn generate_bracketed(n: usize, seed: u64, max_len: usize) -> Vec<String> {
    let mut g = Generator {
        rng: ChaCha8Rng::seed_from_u64(seed),
    };
    let max_len = max_len.max(2);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let s = g.sentence(0);
        let len = s.leaves();
        if len < 2 || len > max_len {
            continue;
        }
        let mut text = String::new();
        s.write(&mut text);
        out.push(text);
    }
    out
}

/// `n` trees read through the ordinary bracketed-tree reader.
pub fn generate(n: usize, seed: u64, max_len: usize) -> Result<Corpus> {
    generate_bracketed(n, seed, max_len)
        .iter()
        .map(|s| Tree::from_bracketed(s))
        .collect::<Result<Vec<_>>>()
        .map(Corpus::new)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_bounded() {
        let a = generate_bracketed(200, 7, 25);
        assert_eq!(a, generate_bracketed(200, 7, 25));
        assert_ne!(a, generate_bracketed(200, 8, 25));
        let c = generate(200, 7, 25).unwrap();
        assert!(c.iter().all(|t| (2..=25).contains(&t.len())));
        assert!(c.iter().all(|t| t.tags().is_some()));
    }

    #[test]
    fn has_structure_punctuation_and_numbers() {
        let c = generate(500, 1, 40).unwrap();
        let spans: usize = c.iter().map(|t| t.bracketing().constituents().count()).sum();
        assert!(spans > 500);
        let toks: Vec<&String> = c.iter().flat_map(|t| t.tokens()).collect();
        assert!(toks.iter().any(|t| *t == "."));
        assert!(toks.iter().any(|t| crate::treebank::is_numeric(t)));
    }
}
