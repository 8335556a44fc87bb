//! Grid experiments: labeled budget × augmentation × self-training steps ×
//! vocabulary size, repeated over seeds.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use super::settings::{parse_vocab_size, Settings};
use crate::augment::{self, AugmentConfig};
use crate::error::{Error, Result};
use crate::eval::{self, EvalConfig};
use crate::scorer::ScorerModel;
use crate::selftrain::{self, SelfTrainConfig};
use crate::synthetic;
use crate::trainer::{self, TrainConfig};
use crate::treebank::{build_vocabulary_from_sentences, read_treebank, Corpus, Sentence};

/// Labeled examples split into training and dev, written `train/dev`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Budget {
    pub train: usize,
    pub dev: usize,
}

impl Budget {
    pub fn total(&self) -> usize {
        self.train + self.dev
    }
}

impl FromStr for Budget {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (a, b) = s
            .split_once('/')
            .ok_or_else(|| format!("expected TRAIN/DEV, found {s:?}"))?;
        let train: usize = a.trim().parse().map_err(|e| format!("{a:?}: {e}"))?;
        let dev: usize = b.trim().parse().map_err(|e| format!("{b:?}: {e}"))?;
        if train == 0 || dev == 0 {
            return Err("both halves of a budget must be positive".into());
        }
        Ok(Budget { train, dev })
    }
}

impl std::fmt::Display for Budget {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.train, self.dev)
    }
}

#[derive(Clone, Copy, Debug)]
struct VocabCap(usize);

impl FromStr for VocabCap {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        parse_vocab_size(s).map(VocabCap)
    }
}

/// One grid cell, excluding the seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct CellKey {
    pub budget: Budget,
    /// Augmented corpus size; 0 means no augmentation.
    pub augment: usize,
    pub st_steps: usize,
    pub vocab_size: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunResult {
    pub key: CellKey,
    pub seed: u64,
    pub test_f1: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellSummary {
    pub key: CellKey,
    pub runs: usize,
    pub mean: f64,
    pub std: f64,
}

/// Labeled trees, an unlabeled pool and a test set.
#[derive(Clone, Debug)]
pub struct ExperimentData {
    /// The first labeled trees, in file order; budgets take prefixes of this.
    pub labeled: Corpus,
    pub pool: Vec<Sentence>,
    pub test: Corpus,
}

#[derive(Clone, Debug)]
pub struct Grid {
    pub budgets: Vec<Budget>,
    pub augment: Vec<usize>,
    pub st_steps: Vec<usize>,
    pub vocab_sizes: Vec<usize>,
    pub seeds: Vec<u64>,
}

impl Grid {
    pub fn from_settings(s: &Settings) -> Result<Self> {
        let mut grid = Grid {
            budgets: s.get_list("grid.budgets")?,
            augment: s.get_list("grid.augment")?,
            st_steps: s.get_list("grid.st_steps")?,
            vocab_sizes: s
                .get_list::<VocabCap>("grid.vocab_sizes")?
                .into_iter()
                .map(|v| v.0)
                .collect(),
            seeds: s.get_list("grid.seeds")?,
        };
        for list in [&mut grid.augment, &mut grid.st_steps, &mut grid.vocab_sizes] {
            list.sort_unstable();
            list.dedup();
        }
        grid.budgets.sort_unstable();
        grid.budgets.dedup();
        for b in &grid.budgets {
            if let Some(&a) = grid.augment.iter().find(|&&a| a != 0 && a < b.train) {
                return Err(Error::config(format!(
                    "grid.augment: size {a} is smaller than the {} training trees of budget {b}",
                    b.train
                )));
            }
        }
        Ok(grid)
    }

    pub fn cell_count(&self) -> usize {
        self.budgets.len() * self.augment.len() * self.st_steps.len() * self.vocab_sizes.len()
    }
}

/// Loads or generates the data for an experiment.
///
/// Layout: labeled trees first, then the pool, with the test set taken from
/// the end.
pub fn load_data(s: &Settings, labeled: usize) -> Result<ExperimentData> {
    let source = s.raw("data");
    let corpus = if source == "synthetic" {
        synthetic::generate(
            s.get("data.synthetic_size")?,
            s.get("data.synthetic_seed")?,
            s.get("data.synthetic_max_len")?,
        )?
    } else {
        read_treebank(Path::new(source), true)?
    };
    let test_size: usize = s.get("data.test_size")?;
    let pool_size: usize = s.get("data.pool_size")?;
    let need = labeled + pool_size + test_size;
    if corpus.len() < need {
        return Err(Error::config(format!(
            "data: {} trees available, {need} needed ({labeled} labeled, {pool_size} pool, {test_size} test)",
            corpus.len()
        )));
    }
    if test_size == 0 {
        return Err(Error::config("data.test_size must be positive"));
    }
    let trees = corpus.trees();
    let test_start = trees.len() - test_size;
    Ok(ExperimentData {
        labeled: Corpus::new(trees[..labeled].to_vec()),
        pool: trees[labeled..labeled + pool_size]
            .iter()
            .map(|t| t.sentence().clone())
            .collect(),
        test: Corpus::new(trees[test_start..].to_vec()),
    })
}

/// Runs the full grid. Cells are visited in key order; self-training steps
/// for one base model are taken from a single self-training run.
pub fn run_grid(s: &Settings) -> Result<Vec<RunResult>> {
    let grid = Grid::from_settings(s)?;
    let max_budget = grid.budgets.iter().map(Budget::total).max().unwrap_or(0);
    let data = load_data(s, max_budget)?;
    let eval_config = s.eval_config()?;
    let mut results = Vec::new();
    for &budget in &grid.budgets {
        for &augment in &grid.augment {
            for &vocab_size in &grid.vocab_sizes {
                for &seed in &grid.seeds {
                    let mut run = s.clone();
                    run.set("seed", &seed.to_string())?;
                    let f1s = run_base(&run, &data, budget, augment, vocab_size, &grid.st_steps, &eval_config)?;
                    for (st_steps, test_f1) in f1s {
                        let key = CellKey {
                            budget,
                            augment,
                            st_steps,
                            vocab_size,
                        };
                        log::info!("cell {key:?} seed {seed}: test F1 {test_f1:.2}");
                        results.push(RunResult { key, seed, test_f1 });
                    }
                }
            }
        }
    }
    results.sort_by(|a, b| a.key.cmp(&b.key).then(a.seed.cmp(&b.seed)));
    Ok(results)
}

/// Trains one base model and evaluates it after each requested number of
/// self-training steps.
fn run_base(
    s: &Settings,
    data: &ExperimentData,
    budget: Budget,
    augment: usize,
    vocab_size: usize,
    st_steps: &[usize],
    eval_config: &EvalConfig,
) -> Result<Vec<(usize, f64)>> {
    let labeled = data.labeled.take_first(budget.total());
    let (mut train, dev) = labeled.split_at(budget.train);
    if augment > 0 {
        let config = AugmentConfig {
            target_size: augment,
            ..s.augment_config()?
        };
        train = augment::augment_corpus(&train, &config)?;
    }
    let vocab = build_vocabulary_from_sentences(
        train.iter().map(|t| t.sentence()).chain(data.pool.iter()),
        vocab_size,
    )?;
    let model = ScorerModel::init(s.scorer_config()?, vocab, None)?;
    let train_config = TrainConfig {
        epochs: if augment > 0 {
            s.get("epochs_augmented")?
        } else {
            s.get("epochs")?
        },
        ..s.train_config()?
    };
    let (model, _) = trainer::train(model, &train, &dev, &train_config)?;

    let test = |m: &ScorerModel| -> Result<f64> {
        let predicted = trainer::parse_all(m, &data.test.sentences())?;
        Ok(eval::score_corpus(&data.test, &predicted, eval_config)?.f1)
    };
    let mut out = Vec::new();
    if st_steps.contains(&0) {
        out.push((0, test(&model)?));
    }
    let max_steps = st_steps.iter().copied().max().unwrap_or(0);
    if max_steps > 0 {
        let config = SelfTrainConfig {
            steps: max_steps,
            ..s.selftrain_config()?
        };
        let dev_sentences = dev.sentences();
        selftrain::self_train_with(model, &data.pool, Some(&dev_sentences), &config, |step, m| {
            if st_steps.contains(&step) {
                out.push((step, test(m)?));
            }
            Ok(())
        })?;
    }
    Ok(out)
}

/// Mean and sample standard deviation per cell, in key order.
pub fn summarize(results: &[RunResult]) -> Vec<CellSummary> {
    let mut cells: BTreeMap<CellKey, Vec<f64>> = BTreeMap::new();
    for r in results {
        cells.entry(r.key).or_default().push(r.test_f1);
    }
    cells
        .into_iter()
        .map(|(key, f1s)| {
            let (mean, std) = mean_std(&f1s);
            CellSummary {
                key,
                runs: f1s.len(),
                mean,
                std,
            }
        })
        .collect()
}

/// Mean and sample (n − 1) standard deviation; the deviation of one value is 0.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

fn vocab_label(v: usize) -> String {
    if v == usize::MAX {
        "all".into()
    } else {
        v.to_string()
    }
}

pub fn summary_csv(cells: &[CellSummary]) -> String {
    let mut out = String::from("train,dev,augment,st_steps,vocab_size,runs,f1_mean,f1_std\n");
    for c in cells {
        let k = c.key;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{:.4},{:.4}",
            k.budget.train,
            k.budget.dev,
            k.augment,
            k.st_steps,
            vocab_label(k.vocab_size),
            c.runs,
            c.mean,
            c.std
        );
    }
    out
}

pub fn runs_csv(results: &[RunResult]) -> String {
    let mut out = String::from("train,dev,augment,st_steps,vocab_size,seed,f1\n");
    for r in results {
        let k = r.key;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{:.4}",
            k.budget.train,
            k.budget.dev,
            k.augment,
            k.st_steps,
            vocab_label(k.vocab_size),
            r.seed,
            r.test_f1
        );
    }
    out
}
