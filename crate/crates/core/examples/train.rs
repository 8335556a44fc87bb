//! Trains a small parser on synthetic trees and reports dev and test F1.
//!
//! ```text
//! cargo run --release --example train -- [train_size] [epochs] [encoder]
//! ```

use spanparse::eval::EvalConfig;
use spanparse::scorer::{EncoderKind, ScorerConfig, ScorerModel};
use spanparse::synthetic;
use spanparse::trainer::{self, TrainConfig};
use spanparse::treebank::build_vocabulary;

fn main() -> spanparse::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let size: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(50);
    let epochs: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(40);
    let encoder: EncoderKind = args
        .get(3)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(EncoderKind::BiLstm);

    let corpus = synthetic::generate(size + 200, 42, 30)?;
    let (train, rest) = corpus.split_at(size);
    let (dev, test) = rest.split_at(100);

    let config = ScorerConfig {
        encoder,
        embedding_dim: 32,
        hidden_dim: 64,
        ff_dim: 64,
        ..Default::default()
    };
    let model = ScorerModel::init(config, build_vocabulary(&train, 10_000)?, None)?;
    let train_config = TrainConfig {
        epochs,
        patience: epochs,
        ..Default::default()
    };
    let (model, report) = trainer::train(model, &train, &dev, &train_config)?;
    let eval = EvalConfig::default();
    println!("epochs run       {}", report.epoch_losses.len());
    println!("best epoch       {}", report.best_epoch);
    println!("best dev F1      {:.2}", report.best_dev_f1);
    println!("train F1         {:.2}", trainer::evaluate(&model, &train, &eval)?);
    println!("test F1          {:.2}", trainer::evaluate(&model, &test, &eval)?);
    println!("seconds          {:.1}", report.elapsed_secs);
    Ok(())
}
