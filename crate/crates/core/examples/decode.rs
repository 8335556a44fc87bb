//! Decodes hand-written span scores with CKY, with and without the
//! structured margin against a gold tree.
//!
//! ```text
//! cargo run --example decode
//! ```

use spanparse::decoder::{decode, decode_loss_augmented, tree_score};
use spanparse::{Sentence, Span, SpanScores, Tree};

fn main() -> spanparse::Result<()> {
    let sentence = Sentence::from_raw_line("a cat is drinking milk")?;
    let mut scores = SpanScores::zeros(sentence.len());
    scores.set(Span::new(0, 2), 2.0);
    scores.set(Span::new(2, 5), 1.5);
    scores.set(Span::new(3, 5), 0.5);
    scores.set(Span::new(1, 3), -1.0);

    let best = decode(&scores)?;
    println!("best tree   {}", Tree::new(sentence.clone(), best.clone())?);
    println!("score       {:.2}", tree_score(&scores, &best)?);

    let gold = Tree::from_bracketed("(NT (NT a cat) (NT is drinking milk))")?;
    let aug = decode_loss_augmented(&scores, gold.bracketing())?;
    println!("most violating tree {}", Tree::new(sentence, aug.tree)?);
    println!("score + margin      {:.2}", aug.objective);

    let flat = decode(&SpanScores::zeros(4))?;
    println!("all-zero scores give {} span(s)", flat.span_count());
    Ok(())
}
