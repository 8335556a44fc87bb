//! PTB-style S-expression reading and writing.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{Bracketing, Child, Corpus, Sentence, Span, Tree};
use crate::error::{Error, Result};

/// Preterminal tag of empty elements (traces), dropped on read.
const EMPTY_ELEMENT: &str = "-NONE-";

#[derive(Debug, PartialEq)]
enum Token<'a> {
    Open,
    Close,
    Atom(&'a str),
}

fn lex(text: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices() {
        if c == '(' || c == ')' || c.is_whitespace() {
            if let Some(s) = start.take() {
                out.push(Token::Atom(&text[s..i]));
            }
            match c {
                '(' => out.push(Token::Open),
                ')' => out.push(Token::Close),
                _ => {}
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push(Token::Atom(&text[s..]));
    }
    out
}

#[derive(Debug)]
enum Node<'a> {
    Leaf(&'a str),
    Internal {
        label: &'a str,
        children: Vec<Node<'a>>,
    },
}

struct NodeParser<'a> {
    tokens: Vec<Token<'a>>,
    pos: usize,
}

impl<'a> NodeParser<'a> {
    fn node(&mut self) -> Result<Node<'a>, String> {
        match self.tokens.get(self.pos) {
            Some(Token::Atom(a)) => {
                self.pos += 1;
                Ok(Node::Leaf(a))
            }
            Some(Token::Open) => {
                self.pos += 1;
                let label = match self.tokens.get(self.pos) {
                    Some(Token::Atom(a)) => {
                        self.pos += 1;
                        *a
                    }
                    _ => "",
                };
                let mut children = Vec::new();
                loop {
                    match self.tokens.get(self.pos) {
                        Some(Token::Close) => {
                            self.pos += 1;
                            break;
                        }
                        Some(_) => children.push(self.node()?),
                        None => return Err("unbalanced brackets: missing ')'".into()),
                    }
                }
                if children.is_empty() {
                    return Err(format!("node {label:?} has no children"));
                }
                Ok(Node::Internal { label, children })
            }
            Some(Token::Close) => Err("unexpected ')'".into()),
            None => Err("unexpected end of input".into()),
        }
    }
}

#[derive(Default)]
struct Flattened {
    tokens: Vec<String>,
    tags: Vec<String>,
    spans: Vec<Span>,
}

impl Flattened {
    fn visit(&mut self, node: &Node<'_>, top: bool) {
        match node {
            Node::Leaf(word) => {
                self.tokens.push((*word).to_string());
                self.tags.push(String::new());
            }
            Node::Internal { label, children } => {
                if !top && children.len() == 1 {
                    if let Node::Leaf(word) = children[0] {
                        // preterminal
                        if *label != EMPTY_ELEMENT {
                            self.tokens.push(word.to_string());
                            self.tags.push((*label).to_string());
                        }
                        return;
                    }
                }
                let begin = self.tokens.len();
                for child in children {
                    self.visit(child, false);
                }
                let end = self.tokens.len();
                if end - begin >= 2 {
                    self.spans.push(Span::new(begin, end));
                }
            }
        }
    }
}

pub(super) fn parse_tree(text: &str) -> Result<Tree, String> {
    let mut parser = NodeParser {
        tokens: lex(text),
        pos: 0,
    };
    if !matches!(parser.tokens.first(), Some(Token::Open)) {
        return Err("tree must start with '('".into());
    }
    let root = parser.node()?;
    if parser.pos != parser.tokens.len() {
        return Err("trailing input after tree".into());
    }
    let mut flat = Flattened::default();
    flat.visit(&root, true);
    if flat.tokens.is_empty() {
        return Err("tree has no tokens".into());
    }
    let len = flat.tokens.len();
    let sentence = Sentence::new(flat.tokens).map_err(|e| e.to_string())?;
    let bracketing = Bracketing::new(len, flat.spans).map_err(|e| e.to_string())?;
    let tags = if flat.tags.iter().any(|t| !t.is_empty()) {
        Some(flat.tags)
    } else {
        None
    };
    Tree::new(sentence, bracketing)
        .and_then(|t| t.with_tags(tags))
        .map_err(|e| e.to_string())
}

pub(super) fn write_node(f: &mut fmt::Formatter<'_>, tree: &Tree, span: Span) -> fmt::Result {
    f.write_str("(NT")?;
    for child in tree.bracketing().children(span) {
        f.write_str(" ")?;
        match child {
            Child::Token(i) => {
                let tok = &tree.tokens()[i];
                match tree.tags().map(|t| t[i].as_str()) {
                    Some(tag) if !tag.is_empty() => write!(f, "({tag} {tok})")?,
                    _ => f.write_str(tok)?,
                }
            }
            Child::Constituent(s) => write_node(f, tree, s)?,
        }
    }
    f.write_str(")")
}

/// Reads one bracketed tree per line. Blank lines are ignored.
///
/// In strict mode a malformed line is an error carrying its 1-based line
/// number; otherwise it is skipped with a warning.
pub fn read_treebank(path: impl AsRef<Path>, strict: bool) -> Result<Corpus> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut trees = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        match parse_tree(&line) {
            Ok(tree) => trees.push(tree),
            Err(message) if strict => {
                return Err(Error::Parse {
                    line: idx + 1,
                    message,
                })
            }
            Err(message) => {
                log::warn!("{}:{}: skipping malformed tree: {message}", path.display(), idx + 1)
            }
        }
    }
    Ok(Corpus::new(trees))
}

pub fn write_treebank(corpus: &Corpus, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for tree in corpus {
        writeln!(out, "{tree}").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Reads one whitespace-tokenized sentence per line. Empty lines are errors.
pub fn read_raw_sentences(path: impl AsRef<Path>) -> Result<Vec<Sentence>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let sentence = Sentence::from_raw_line(&line).map_err(|e| Error::Parse {
            line: idx + 1,
            message: e.to_string(),
        })?;
        out.push(sentence);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn span_set(tree: &Tree) -> Vec<(usize, usize)> {
        tree.spans().map(|s| (s.begin, s.end)).collect()
    }

    #[test]
    fn nested_tree_spans() {
        let t = Tree::from_bracketed("(NT (NT a cat) (NT is drinking milk))").unwrap();
        assert_eq!(t.tokens(), &["a", "cat", "is", "drinking", "milk"]);
        assert_eq!(span_set(&t), vec![(0, 2), (0, 5), (2, 5)]);
        assert!(t.tags().is_none());
    }

    #[test]
    fn single_token() {
        let t = Tree::from_bracketed("(NT word)").unwrap();
        assert_eq!(t.tokens(), &["word"]);
        assert_eq!(span_set(&t), vec![(0, 1)]);
        assert_eq!(t.to_string(), "(NT word)");
    }

    #[test]
    fn unbalanced() {
        let err = Tree::from_bracketed("(NT (NT a").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
        assert!(Tree::from_bracketed("(NT a))").is_err());
        assert!(Tree::from_bracketed("a b").is_err());
        assert!(Tree::from_bracketed("(NT)").is_err());
    }

    #[test]
    fn unary_chains_and_preterminals_collapse() {
        let t = Tree::from_bracketed("(NT (NT a b))").unwrap();
        assert_eq!(span_set(&t), vec![(0, 2)]);
        assert_eq!(t.to_string(), "(NT a b)");

        let t = Tree::from_bracketed("( (S (NP (DT the) (NN dog)) (VP (VBZ barks)) (. .)))")
            .unwrap();
        assert_eq!(t.tokens(), &["the", "dog", "barks", "."]);
        assert_eq!(span_set(&t), vec![(0, 2), (0, 4)]);
        assert_eq!(t.tags().unwrap(), &["DT", "NN", "VBZ", "."]);
        assert_eq!(t.to_string(), "(NT (NT (DT the) (NN dog)) (VBZ barks) (. .))");
    }

    #[test]
    fn empty_elements_dropped() {
        let t = Tree::from_bracketed(
            "(S (NP-SBJ (-NONE- *)) (VP (VBD said) (NP (PRP it))) (. .))",
        )
        .unwrap();
        assert_eq!(t.tokens(), &["said", "it", "."]);
        assert_eq!(span_set(&t), vec![(0, 2), (0, 3)]);
    }

    #[test]
    fn writer_round_trip() {
        let text = "(NT (NT several kittens) (NT were born (NT in (NT the shelter))))";
        let t = Tree::from_bracketed(text).unwrap();
        assert_eq!(t.to_string(), text);
        assert_eq!(Tree::from_bracketed(&t.to_string()).unwrap(), t);
    }

    #[test]
    fn strict_and_lenient_reading() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tb.txt");
        std::fs::write(&path, "(NT a b)\n\n(NT (NT a\n(NT c d)\n").unwrap();
        let err = read_treebank(&path, true).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
        let corpus = read_treebank(&path, false).unwrap();
        assert_eq!(corpus.len(), 2);

        let empty = dir.path().join("empty.txt");
        std::fs::write(&empty, "").unwrap();
        assert!(read_treebank(&empty, true).unwrap().is_empty());
        write_treebank(&Corpus::default(), &empty).unwrap();
        assert_eq!(std::fs::read_to_string(&empty).unwrap(), "");
    }

    #[test]
    fn raw_sentences_reject_empty_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("raw.txt");
        std::fs::write(&path, "a b\n\nc\n").unwrap();
        let err = read_raw_sentences(&path).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }
}
