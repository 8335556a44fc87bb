//! Unlabeled bracketing F1 in corpus and sentence mode.
//!
//! ```text
//! cargo run --example evaluate
//! ```

use spanparse::eval::{score_corpus, EvalConfig, EvalMode};
use spanparse::{Corpus, Tree};

fn corpus(lines: &[&str]) -> spanparse::Result<Corpus> {
    lines.iter().map(|l| Tree::from_bracketed(l)).collect::<spanparse::Result<Vec<_>>>().map(Corpus::new)
}

fn main() -> spanparse::Result<()> {
    let gold = corpus(&[
        "(NT (NT a cat) (NT is drinking milk))",
        "(NT (NT the dog) (NT barks loudly) .)",
        "(NT (NT we came) ; (NT we saw))",
    ])?;
    let predicted = corpus(&[
        "(NT a (NT cat (NT is (NT drinking milk))))",
        "(NT the (NT dog barks) (NT loudly .))",
        "(NT we (NT came ;) (NT we saw))",
    ])?;
    let pooled = score_corpus(&gold, &predicted, &EvalConfig::default())?;
    print!("{}", pooled.report());
    let per_sentence = EvalConfig {
        mode: EvalMode::Sentence,
        ..Default::default()
    };
    let averaged = score_corpus(&gold, &predicted, &per_sentence)?;
    println!("sentence-averaged F1 {:.2}", averaged.f1);
    print!("{}", averaged.to_csv());
    Ok(())
}
