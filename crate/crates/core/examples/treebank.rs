//! Reads bracketed trees, prints their spans, and builds a vocabulary.
//!
//! ```text
//! cargo run --example treebank
//! ```

use spanparse::treebank::{build_vocabulary, Corpus, Tree};

fn main() -> spanparse::Result<()> {
    let lines = [
        "(S (NP (DT a) (NN cat)) (VP (VBZ is) (VP (VBG drinking) (NP (NN milk)))))",
        "(NT (NT several kittens) (NT were born (NT in (NT the shelter))))",
        "(S (NP (NNS prices)) (VP (VBD rose) (NP (CD 4.5) (NN %))) (. .))",
    ];
    let trees = lines.iter().map(|l| Tree::from_bracketed(l)).collect::<spanparse::Result<Vec<_>>>()?;
    for t in &trees {
        let spans: Vec<String> = t.spans().map(|s| format!("({},{})", s.begin, s.end)).collect();
        println!("{t}");
        println!("  tokens: {}", t.tokens().join(" "));
        println!("  spans:  {}", spans.join(" "));
        if let Some(tags) = t.tags() {
            println!("  tags:   {}", tags.join(" "));
        }
    }
    let corpus = Corpus::new(trees);
    let vocab = build_vocabulary(&corpus.normalize_numbers(), 10)?;
    println!("vocabulary ({} entries): {}", vocab.len(), vocab.tokens().join(" "));
    Ok(())
}
