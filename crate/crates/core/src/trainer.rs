//! Max-margin training with dev-set model selection.

use std::fmt::Write as _;
use std::time::Instant;

use ndarray::{Array1, Zip};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::decoder;
use crate::error::{Error, Result};
use crate::eval::{self, EvalConfig};
use crate::scorer::{Gradients, Parameters, ScorerModel, SpanScores};
use crate::treebank::{Bracketing, Corpus, Sentence};
use crate::derive_seed;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Evaluations without dev improvement before stopping.
    pub patience: usize,
    /// Evaluate on dev every this many epochs.
    pub eval_every: usize,
    pub seed: u64,
    /// Training sentences longer than this are skipped.
    pub max_len: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 30,
            batch_size: 8,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            patience: 5,
            eval_every: 1,
            seed: 0,
            max_len: 60,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("epochs", self.epochs),
            ("batch_size", self.batch_size),
            ("patience", self.patience),
            ("eval_every", self.eval_every),
            ("max_len", self.max_len),
        ];
        for (name, value) in positive {
            if value == 0 {
                return Err(Error::config(format!("{name} must be positive")));
            }
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::config("learning_rate must be positive"));
        }
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(0.0..1.0).contains(&b) {
                return Err(Error::config(format!("{name} must lie in [0, 1)")));
            }
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::config("epsilon must be positive"));
        }
        Ok(())
    }
}

/// Loss and subgradient of one sentence.
#[derive(Clone, Debug)]
pub struct Hinge {
    pub loss: f64,
    /// `None` when the margin constraint holds.
    pub gradients: Option<Gradients>,
    pub predicted: Bracketing,
}

/// Structured hinge loss `max(0, max_T [score(T) + Δ(gold, T)] − score(gold))`.
///
/// Dropout masks are drawn from `rng`; with zero dropout the result is a pure
/// function of the parameters.
pub fn hinge_loss<R: Rng>(
    model: &ScorerModel,
    ids: &[u32],
    gold: &Bracketing,
    rng: &mut R,
) -> Result<Hinge> {
    if gold.sentence_len() != ids.len() {
        return Err(Error::invalid(format!(
            "gold tree over {} tokens, sentence has {}",
            gold.sentence_len(),
            ids.len()
        )));
    }
    let (scores, tape) = model.score_spans_train(ids, rng)?;
    let aug = decoder::decode_loss_augmented(&scores, gold)?;
    let gold_score = decoder::tree_score(&scores, gold)?;
    let loss = (aug.objective - gold_score).max(0.0);
    if loss == 0.0 || aug.tree == *gold {
        return Ok(Hinge {
            loss,
            gradients: None,
            predicted: aug.tree,
        });
    }
    let mut weights = SpanScores::zeros(ids.len());
    for s in aug.tree.spans() {
        weights.add(s, 1.0);
    }
    for s in gold.spans() {
        weights.add(s, -1.0);
    }
    let gradients = model.backprop(&tape, &weights)?;
    Ok(Hinge {
        loss,
        gradients: Some(gradients),
        predicted: aug.tree,
    })
}

struct Adam {
    m: Parameters,
    v: Parameters,
    touched: Vec<bool>,
    t: i32,
}

impl Adam {
    fn new(params: &Parameters) -> Self {
        let mut m = params.clone();
        m.fill(0.0);
        Adam {
            v: m.clone(),
            m,
            touched: vec![false; params.embeddings.nrows()],
            t: 0,
        }
    }

    fn step(&mut self, params: &mut Parameters, grad: &Gradients, cfg: &TrainConfig) {
        self.t += 1;
        let (b1, b2, eps) = (cfg.beta1, cfg.beta2, cfg.epsilon);
        let bc1 = 1.0 - b1.powi(self.t);
        let bc2 = 1.0 - b2.powi(self.t);
        let lr = cfg.learning_rate * bc2.sqrt() / bc1;
        let update = |p: &mut f64, m: &mut f64, v: &mut f64, g: f64| {
            *m = b1 * *m + (1.0 - b1) * g;
            *v = b2 * *v + (1.0 - b2) * g * g;
            *p -= lr * *m / (v.sqrt() + eps);
        };

        let dense = params.dense.named_mut();
        let ms = self.m.dense.named_mut();
        let vs = self.v.dense.named_mut();
        let gs = grad.dense.named();
        for ((((_, mut p), (_, mut m)), (_, mut v)), (_, g)) in
            dense.into_iter().zip(ms).zip(vs).zip(gs)
        {
            Zip::from(&mut p)
                .and(&mut m)
                .and(&mut v)
                .and(&g)
                .for_each(|p, m, v, &g| update(p, m, v, g));
        }

        for &row in grad.embeddings.keys() {
            self.touched[row as usize] = true;
        }
        let dim = params.embeddings.ncols();
        let zeros = Array1::zeros(dim);
        for (row, touched) in self.touched.iter().enumerate() {
            if !touched {
                continue;
            }
            let g = grad.embeddings.get(&(row as u32)).unwrap_or(&zeros);
            Zip::from(params.embeddings.row_mut(row))
                .and(self.m.embeddings.row_mut(row))
                .and(self.v.embeddings.row_mut(row))
                .and(g)
                .for_each(|p, m, v, &g| update(p, m, v, g));
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Evaluation {
    pub epoch: usize,
    pub dev_f1: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrainReport {
    /// Mean hinge loss of each completed epoch.
    pub epoch_losses: Vec<f64>,
    pub evaluations: Vec<Evaluation>,
    /// Epoch after which the returned checkpoint was taken.
    pub best_epoch: usize,
    pub best_dev_f1: f64,
    /// Training sentences skipped for exceeding the length cap.
    pub skipped: usize,
    pub elapsed_secs: f64,
}

impl TrainReport {
    /// `epoch,loss,dev_f1`; dev F1 is blank for epochs without evaluation.
    /// Wall-clock time is left out so that reruns compare byte for byte.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,loss,dev_f1\n");
        for (i, loss) in self.epoch_losses.iter().enumerate() {
            let epoch = i + 1;
            let f1 = self
                .evaluations
                .iter()
                .find(|e| e.epoch == epoch)
                .map(|e| format!("{:.4}", e.dev_f1))
                .unwrap_or_default();
            let _ = writeln!(out, "{epoch},{loss:.6},{f1}");
        }
        out
    }
}

/// Unlabeled corpus F1 of `model`'s parses of `gold`'s sentences.
pub fn evaluate(model: &ScorerModel, gold: &Corpus, config: &EvalConfig) -> Result<f64> {
    let predicted = parse_all(model, &gold.sentences())?;
    Ok(eval::score_corpus(gold, &predicted, config)?.f1)
}

/// Parses every sentence, in parallel, keeping input order.
pub fn parse_all(model: &ScorerModel, sentences: &[Sentence]) -> Result<Corpus> {
    let trees = sentences
        .par_iter()
        .map(|s| model.parse(s))
        .collect::<Result<Vec<_>>>()?;
    Ok(Corpus::new(trees))
}

/// Trains with a caller-supplied dev metric (higher is better).
pub fn fit<F>(
    mut model: ScorerModel,
    train: &Corpus,
    config: &TrainConfig,
    mut dev_metric: F,
) -> Result<(ScorerModel, TrainReport)>
where
    F: FnMut(&ScorerModel) -> Result<f64>,
{
    config.validate()?;
    if train.is_empty() {
        return Err(Error::invalid("training corpus is empty"));
    }
    let start = Instant::now();
    let examples: Vec<(Vec<u32>, &Bracketing)> = train
        .iter()
        .filter(|t| t.len() <= config.max_len)
        .map(|t| (model.encode(t.sentence()), t.bracketing()))
        .collect();
    let skipped = train.len() - examples.len();
    if examples.is_empty() {
        return Err(Error::invalid(format!(
            "every training sentence exceeds max_len {}",
            config.max_len
        )));
    }
    if skipped > 0 {
        log::info!("skipping {skipped} training sentences longer than {}", config.max_len);
    }

    let mut order: Vec<usize> = (0..examples.len()).collect();
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, 0x5348_5546));
    let mut adam = Adam::new(model.params());
    let mut report = TrainReport {
        epoch_losses: Vec::new(),
        evaluations: Vec::new(),
        best_epoch: 0,
        best_dev_f1: f64::NEG_INFINITY,
        skipped,
        elapsed_secs: 0.0,
    };
    let mut best: Option<ScorerModel> = None;
    let mut stale = 0;
    let mut step: u64 = 0;

    for epoch in 1..=config.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut total = 0.0;
        for batch in order.chunks(config.batch_size) {
            step += 1;
            let step_seed = derive_seed(config.seed, step);
            let results = batch
                .par_iter()
                .map(|&i| {
                    let (ids, gold) = &examples[i];
                    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(step_seed, i as u64));
                    hinge_loss(&model, ids, gold, &mut rng)
                })
                .collect::<Result<Vec<_>>>()?;
            let mut grad: Option<Gradients> = None;
            for h in results {
                total += h.loss;
                if let Some(g) = h.gradients {
                    match grad.as_mut() {
                        Some(acc) => acc.add_assign(&g),
                        None => grad = Some(g),
                    }
                }
            }
            if let Some(mut g) = grad {
                g.scale(1.0 / batch.len() as f64);
                adam.step(model.params_mut(), &g, config);
            }
        }
        let mean = total / examples.len() as f64;
        report.epoch_losses.push(mean);
        log::debug!("epoch {epoch} loss {mean:.4}");

        if epoch % config.eval_every == 0 || epoch == config.epochs {
            let f1 = dev_metric(&model)?;
            log::debug!("epoch {epoch} dev f1 {f1:.2}");
            report.evaluations.push(Evaluation { epoch, dev_f1: f1 });
            if f1 > report.best_dev_f1 {
                report.best_dev_f1 = f1;
                report.best_epoch = epoch;
                best = Some(model.clone());
                stale = 0;
            } else {
                stale += 1;
                if stale >= config.patience {
                    log::info!("early stop after epoch {epoch}");
                    break;
                }
            }
        }
    }
    report.elapsed_secs = start.elapsed().as_secs_f64();
    Ok((best.unwrap_or(model), report))
}

/// Trains on `train`, selecting the checkpoint with the best corpus F1 on `dev`.
pub fn train(
    model: ScorerModel,
    train: &Corpus,
    dev: &Corpus,
    config: &TrainConfig,
) -> Result<(ScorerModel, TrainReport)> {
    if dev.is_empty() {
        return Err(Error::invalid("dev corpus is empty"));
    }
    let eval_config = EvalConfig::default();
    fit(model, train, config, |m| evaluate(m, dev, &eval_config))
}
