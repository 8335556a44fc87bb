//! Trains a base parser on a few synthetic trees, then self-trains it on
//! unlabeled sentences and reports test F1 after every step.
//!
//! ```text
//! cargo run --release --example selftrain -- [labeled] [pool] [steps]
//! ```

use spanparse::eval::EvalConfig;
use spanparse::scorer::{ScorerConfig, ScorerModel};
use spanparse::selftrain::{self, reports_to_csv, SelfTrainConfig};
use spanparse::synthetic;
use spanparse::trainer::{self, TrainConfig};
use spanparse::treebank::build_vocabulary_from_sentences;

fn main() -> spanparse::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let labeled = args.first().copied().unwrap_or(15);
    let pool_size = args.get(1).copied().unwrap_or(300);
    let steps = args.get(2).copied().unwrap_or(3);

    let corpus = synthetic::generate(labeled + pool_size + 200, 3, 30)?;
    let (gold, rest) = corpus.split_at(labeled);
    let (pool, test) = rest.split_at(pool_size);
    let pool = pool.sentences();
    let (train, dev) = gold.split_at(labeled * 2 / 3);

    let config = ScorerConfig {
        embedding_dim: 32,
        hidden_dim: 64,
        ff_dim: 64,
        ..Default::default()
    };
    let vocab = build_vocabulary_from_sentences(train.iter().map(|t| t.sentence()).chain(pool.iter()), usize::MAX)?;
    let train_config = TrainConfig {
        epochs: 150,
        patience: 30,
        learning_rate: 5e-3,
        ..Default::default()
    };
    let (base, _) = trainer::train(ScorerModel::init(config, vocab, None)?, &train, &dev, &train_config)?;
    let eval = EvalConfig::default();
    println!("step 0: test F1 {:.2}", trainer::evaluate(&base, &test, &eval)?);

    let st = SelfTrainConfig {
        steps,
        train: TrainConfig {
            epochs: 30,
            patience: 10,
            ..train_config
        },
        ..Default::default()
    };
    let dev_sentences = dev.sentences();
    let (_, reports) = selftrain::self_train_with(base, &pool, Some(&dev_sentences), &st, |step, m| {
        println!("step {step}: test F1 {:.2}", trainer::evaluate(m, &test, &eval)?);
        Ok(())
    })?;
    print!("{}", reports_to_csv(&reports));
    Ok(())
}
