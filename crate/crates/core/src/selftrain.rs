//! Iterative self-training on unlabeled sentences.
//!
//! Step `i` parses the pool with model `i-1` and trains model `i` to fit
//! those predictions. The pool is taken as plain sentences, so no gold tree
//! can reach this code path. Model selection inside a step uses a held-out
//! slice of the pool, labeled by the previous model as well.

use std::path::PathBuf;

use serde::Serialize;

use crate::derive_seed;
use crate::error::{Error, Result};
use crate::eval::{self, EvalConfig};
use crate::scorer::ScorerModel;
use crate::trainer::{self, TrainConfig, TrainReport};
use crate::treebank::{write_treebank, Corpus, Sentence};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SelfTrainConfig {
    pub steps: usize,
    /// Configuration of every inner training run; its seed is re-derived per step.
    pub train: TrainConfig,
    /// Continue from the previous model instead of a fresh initialization.
    pub warm_start: bool,
    /// Fraction of the pool held out for model selection when no separate
    /// dev sentences are given.
    pub dev_fraction: f64,
    /// Write each step's predicted treebanks here.
    pub dump_dir: Option<PathBuf>,
}

impl Default for SelfTrainConfig {
    fn default() -> Self {
        SelfTrainConfig {
            steps: 5,
            train: TrainConfig::default(),
            warm_start: false,
            dev_fraction: 0.1,
            dump_dir: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepReport {
    pub step: usize,
    pub train: TrainReport,
    /// F1 of the new model against the trees it was trained on.
    pub fit_f1: f64,
    pub dev_f1: f64,
    pub pool_size: usize,
    pub dev_size: usize,
}

/// Parses every sentence with `model`.
pub fn relabel(model: &ScorerModel, pool: &[Sentence]) -> Result<Corpus> {
    trainer::parse_all(model, pool)
}

/// Runs `config.steps` rounds of self-training starting from `initial`.
///
/// `dev` supplies separate unlabeled sentences for model selection; when it
/// is `None` the last `dev_fraction` of the pool is held out instead.
pub fn self_train(
    initial: ScorerModel,
    pool: &[Sentence],
    dev: Option<&[Sentence]>,
    config: &SelfTrainConfig,
) -> Result<(ScorerModel, Vec<StepReport>)> {
    self_train_with(initial, pool, dev, config, |_, _| Ok(()))
}

/// Like [`self_train`], calling `on_step(step, model)` after every step.
pub fn self_train_with<F>(
    initial: ScorerModel,
    pool: &[Sentence],
    dev: Option<&[Sentence]>,
    config: &SelfTrainConfig,
    mut on_step: F,
) -> Result<(ScorerModel, Vec<StepReport>)>
where
    F: FnMut(usize, &ScorerModel) -> Result<()>,
{
    if config.steps == 0 {
        return Ok((initial, Vec::new()));
    }
    config.train.validate()?;
    if !(0.0..1.0).contains(&config.dev_fraction) {
        return Err(Error::config("dev_fraction must lie in [0, 1)"));
    }
    let cap = config.train.max_len;
    let usable: Vec<Sentence> = pool.iter().filter(|s| s.len() <= cap).cloned().collect();
    if usable.is_empty() {
        return Err(Error::invalid(format!(
            "self-training needs a non-empty pool of sentences with at most {cap} tokens"
        )));
    }
    let (train_pool, dev_pool): (Vec<Sentence>, Vec<Sentence>) = match dev {
        Some(d) if !d.is_empty() => (
            usable,
            d.iter().filter(|s| s.len() <= cap).cloned().collect(),
        ),
        _ => {
            let held = ((usable.len() as f64) * config.dev_fraction).ceil() as usize;
            if held == 0 || held >= usable.len() {
                (usable.clone(), usable)
            } else {
                let split = usable.len() - held;
                (usable[..split].to_vec(), usable[split..].to_vec())
            }
        }
    };
    let dev_pool = if dev_pool.is_empty() {
        train_pool.clone()
    } else {
        dev_pool
    };
    if let Some(dir) = &config.dump_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }

    let eval_config = EvalConfig::default();
    let mut model = initial;
    let mut reports = Vec::with_capacity(config.steps);
    for step in 1..=config.steps {
        let train_trees = relabel(&model, &train_pool)?;
        let dev_trees = relabel(&model, &dev_pool)?;
        if let Some(dir) = &config.dump_dir {
            write_treebank(&train_trees, dir.join(format!("step{step}.train.trees")))?;
            write_treebank(&dev_trees, dir.join(format!("step{step}.dev.trees")))?;
        }
        let step_seed = derive_seed(config.train.seed, step as u64);
        let start = if config.warm_start {
            model.clone()
        } else {
            model.reinitialized(derive_seed(model.config().seed, step as u64))?
        };
        let train_config = TrainConfig {
            seed: step_seed,
            ..config.train.clone()
        };
        let (next, report) = trainer::train(start, &train_trees, &dev_trees, &train_config)?;
        let refit = relabel(&next, &train_trees.sentences())?;
        let fit_f1 = eval::score_corpus(&train_trees, &refit, &eval_config)?.f1;
        log::info!(
            "self-training step {step}: fit F1 {fit_f1:.2}, dev F1 {:.2}",
            report.best_dev_f1
        );
        reports.push(StepReport {
            step,
            dev_f1: report.best_dev_f1,
            train: report,
            fit_f1,
            pool_size: train_pool.len(),
            dev_size: dev_pool.len(),
        });
        on_step(step, &next)?;
        model = next;
    }
    Ok((model, reports))
}

/// One CSV row per step: `step,pool,dev,epochs,best_epoch,dev_f1,fit_f1`.
pub fn reports_to_csv(reports: &[StepReport]) -> String {
    use std::fmt::Write as _;
    let mut out = String::from("step,pool,dev,epochs,best_epoch,dev_f1,fit_f1\n");
    for r in reports {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{:.4},{:.4}",
            r.step,
            r.pool_size,
            r.dev_size,
            r.train.epoch_losses.len(),
            r.train.best_epoch,
            r.dev_f1,
            r.fit_f1
        );
    }
    out
}
