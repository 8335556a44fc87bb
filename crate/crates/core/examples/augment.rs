//! Subtree substitution: replays two fixed substitutions, then grows a
//! synthetic corpus with seeded draws.
//!
//! ```text
//! cargo run --release --example augment -- [base_size] [target_size]
//! ```

use std::collections::VecDeque;

use spanparse::augment::{self, source_spans, target_spans, AugmentConfig, ForcedDraws};
use spanparse::{synthetic, Corpus, Span, Tree};

fn main() -> spanparse::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let base_size = args.first().copied().unwrap_or(100);
    let target_size = args.get(1).copied().unwrap_or(1000);

    let target = Tree::from_bracketed("(NT (NT a cat) (NT is drinking milk))")?;
    let source = Tree::from_bracketed("(NT (NT several kittens) (NT were born (NT in (NT the shelter))))")?;
    let t = target_spans(&target).iter().position(|&s| s == Span::new(2, 5)).unwrap();
    let src = source_spans(&source);
    let a = src.iter().position(|&s| s == Span::new(0, 2)).unwrap();
    let b = src.iter().position(|&s| s == Span::new(4, 7)).unwrap();
    let mut draws = ForcedDraws(VecDeque::from([0, t, 1, a, 0, t, 1, b]));
    let pair = Corpus::new(vec![target, source]);
    let config = AugmentConfig {
        target_size: 4,
        ..Default::default()
    };
    let out = augment::augment_corpus_with(&pair, &config, &mut draws)?;
    for tree in &out.trees()[2..] {
        println!("{tree}");
    }

    let base = synthetic::generate(base_size, 1, 30)?;
    let config = AugmentConfig {
        target_size,
        seed: 7,
        ..Default::default()
    };
    let grown = augment::augment_corpus(&base, &config)?;
    let mean = grown.iter().map(|t| t.len()).sum::<usize>() as f64 / grown.len() as f64;
    println!("grew {} trees to {} (mean length {mean:.1})", base.len(), grown.len());
    for tree in grown.trees().iter().skip(base.len()).take(3) {
        println!("  {tree}");
    }
    Ok(())
}
