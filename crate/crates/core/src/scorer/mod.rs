//! Span scorer: embeddings, a fencepost encoder and a feedforward span head.
//!
//! A sentence of `L` tokens is wrapped in `<s>`/`</s>` boundary tokens and
//! encoded into forward states `f_t` and backward states `g_t`. Fencepost `i`
//! (between tokens `i-1` and `i`) is represented by `f_i` on the forward side
//! and `g_{i+1}` on the backward side, so the span `(b, e)` gets the feature
//! vector
//!
//! ```text
//! [ f_e - f_b ; g_{b+1} - g_{e+1} ]
//! ```
//!
//! which a two-layer ReLU network maps to a single NT score. The score of the
//! ∅ label is fixed at zero, so the score of a tree is the sum of the scores
//! of its spans.
//!
//! The first head layer is linear in the features, so it is applied once per
//! fencepost rather than once per span. This keeps the per-span cost at
//! `O(F)` for a head of width `F`.

mod io;
mod lstm;
mod params;
mod table;

use ndarray::{s, Array1, Array2, ArrayView1, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use io::{load_model, save_model, PretrainedEmbeddings};
pub use params::{DenseParams, EncoderParams, Gradients, HeadParams, LstmParams, Parameters};
pub use table::SpanScores;

use crate::decoder;
use crate::error::{Error, Result};
use crate::treebank::{Sentence, Tree, Vocabulary};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EncoderKind {
    /// Token plus learned position embeddings, split in half for the two sides.
    Embedding,
    /// One bidirectional LSTM layer; `hidden_dim` is split between directions.
    BiLstm,
}

impl std::str::FromStr for EncoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "embedding" => Ok(EncoderKind::Embedding),
            "bilstm" | "bi-lstm" => Ok(EncoderKind::BiLstm),
            other => Err(Error::config(format!(
                "unknown encoder {other:?} (expected embedding or bilstm)"
            ))),
        }
    }
}

impl std::fmt::Display for EncoderKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EncoderKind::Embedding => "embedding",
            EncoderKind::BiLstm => "bilstm",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScorerConfig {
    pub encoder: EncoderKind,
    pub embedding_dim: usize,
    /// Total encoder output width (both directions together).
    pub hidden_dim: usize,
    pub ff_dim: usize,
    pub dropout: f64,
    /// Size of the position table in embedding mode; later positions share the last row.
    pub max_positions: usize,
    pub seed: u64,
}

impl Default for ScorerConfig {
    fn default() -> Self {
        ScorerConfig {
            encoder: EncoderKind::BiLstm,
            embedding_dim: 100,
            hidden_dim: 200,
            ff_dim: 250,
            dropout: 0.2,
            max_positions: 256,
            seed: 0,
        }
    }
}

impl ScorerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.embedding_dim == 0 || self.hidden_dim == 0 || self.ff_dim == 0 {
            return Err(Error::config("scorer dimensions must be positive"));
        }
        if self.max_positions == 0 {
            return Err(Error::config("max_positions must be positive"));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::config(format!(
                "dropout {} outside [0, 1)",
                self.dropout
            )));
        }
        match self.encoder {
            EncoderKind::Embedding if !self.embedding_dim.is_multiple_of(2) => Err(Error::config(
                "embedding encoder needs an even embedding dimension",
            )),
            EncoderKind::BiLstm if !self.hidden_dim.is_multiple_of(2) => {
                Err(Error::config("bilstm encoder needs an even hidden dimension"))
            }
            _ => Ok(()),
        }
    }

    /// Width of one side (forward or backward) of the fencepost features.
    fn side_dim(&self) -> usize {
        match self.encoder {
            EncoderKind::Embedding => self.embedding_dim / 2,
            EncoderKind::BiLstm => self.hidden_dim / 2,
        }
    }
}

#[derive(Clone, Debug)]
enum EncoderCache {
    Embedding,
    BiLstm {
        forward: lstm::LstmCache,
        backward: lstm::LstmCache,
    },
}

/// Intermediate values of one forward pass, consumed by [`ScorerModel::backprop`].
#[derive(Clone, Debug)]
pub struct Tape {
    ids: Vec<u32>,
    signature: (usize, usize),
    emb_mask: Option<Array2<f64>>,
    encoder: EncoderCache,
    fence_fwd: Array2<f64>,
    fence_bwd: Array2<f64>,
    u: Array2<f64>,
    v: Array2<f64>,
    /// Per-span hidden dropout masks, `span_count × F`.
    hidden_mask: Option<Array2<f64>>,
}

impl Tape {
    pub fn sentence_len(&self) -> usize {
        self.ids.len()
    }
}

/// A span scorer together with its configuration and vocabulary.
#[derive(Clone, Debug, PartialEq)]
pub struct ScorerModel {
    config: ScorerConfig,
    vocab: Vocabulary,
    params: Parameters,
}

fn dropout_mask<R: Rng>(shape: (usize, usize), rate: f64, rng: &mut R) -> Array2<f64> {
    let keep = 1.0 / (1.0 - rate);
    Array2::from_shape_fn(shape, |_| if rng.gen::<f64>() < rate { 0.0 } else { keep })
}

fn reversed_rows(a: &Array2<f64>) -> Array2<f64> {
    a.slice(s![..;-1, ..]).to_owned()
}

impl ScorerModel {
    /// Fresh model; rows found in `pretrained` are copied, the rest are sampled from the seed.
    pub fn init(
        config: ScorerConfig,
        vocab: Vocabulary,
        pretrained: Option<&PretrainedEmbeddings>,
    ) -> Result<Self> {
        config.validate()?;
        if let Some(p) = pretrained {
            if p.dim() != config.embedding_dim {
                return Err(Error::config(format!(
                    "pretrained embeddings have dimension {}, model expects {}",
                    p.dim(),
                    config.embedding_dim
                )));
            }
        }
        let mut params = Self::zero_params(&config, vocab.len());
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let emb_bound = (3.0 / config.embedding_dim as f64).sqrt();
        for (name, mut t) in params.named_mut() {
            let shape = t.shape().to_vec();
            if name.ends_with("bias") {
                continue;
            }
            let bound = match name {
                "embeddings" | "positions" => emb_bound,
                _ => {
                    let fan_out = shape[0];
                    let fan_in = shape.get(1).copied().unwrap_or(1);
                    (6.0 / (fan_in + fan_out) as f64).sqrt()
                }
            };
            Parameters::fill_uniform(&mut t, bound, &mut rng);
        }
        if let EncoderParams::BiLstm { forward, backward } = &mut params.dense.encoder {
            for lstm in [forward, backward] {
                let h = lstm.hidden_dim();
                lstm.bias.slice_mut(s![h..2 * h]).fill(1.0);
            }
        }
        if let Some(p) = pretrained {
            for (id, token) in vocab.tokens().iter().enumerate() {
                if let Some(vec) = p.get(token) {
                    params
                        .embeddings
                        .row_mut(id)
                        .assign(&ArrayView1::from(vec));
                }
            }
        }
        Ok(ScorerModel {
            config,
            vocab,
            params,
        })
    }

    pub(crate) fn zero_params(config: &ScorerConfig, vocab_len: usize) -> Parameters {
        let d = config.embedding_dim;
        let side = config.side_dim();
        let encoder = match config.encoder {
            EncoderKind::Embedding => EncoderParams::Embedding {
                positions: Array2::zeros((config.max_positions, d)),
            },
            EncoderKind::BiLstm => EncoderParams::BiLstm {
                forward: LstmParams::zeros(d, side),
                backward: LstmParams::zeros(d, side),
            },
        };
        Parameters {
            embeddings: Array2::zeros((vocab_len, d)),
            dense: DenseParams {
                encoder,
                head: HeadParams {
                    hidden: Array2::zeros((config.ff_dim, 2 * side)),
                    hidden_bias: Array1::zeros(config.ff_dim),
                    output: Array1::zeros(config.ff_dim),
                    output_bias: Array1::zeros(1),
                },
            },
        }
    }

    pub(crate) fn from_parts(
        config: ScorerConfig,
        vocab: Vocabulary,
        params: Parameters,
    ) -> Self {
        ScorerModel {
            config,
            vocab,
            params,
        }
    }

    pub fn config(&self) -> &ScorerConfig {
        &self.config
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn params(&self) -> &Parameters {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut Parameters {
        &mut self.params
    }

    /// Same architecture and vocabulary, parameters re-initialized from `seed`.
    pub fn reinitialized(&self, seed: u64) -> Result<Self> {
        let config = ScorerConfig {
            seed,
            ..self.config.clone()
        };
        ScorerModel::init(config, self.vocab.clone(), None)
    }

    fn signature(&self) -> (usize, usize) {
        (self.vocab.len(), self.params.len())
    }

    pub fn encode(&self, sentence: &Sentence) -> Vec<u32> {
        self.vocab.encode(sentence)
    }

    /// Eval-mode span scores: no dropout, pure function of parameters and input.
    pub fn score_spans(&self, ids: &[u32]) -> Result<SpanScores> {
        self.run(ids, None::<&mut ChaCha8Rng>).map(|(scores, _)| scores)
    }

    /// Train-mode forward pass with dropout drawn from `rng`; returns the tape for backprop.
    pub fn score_spans_train<R: Rng>(&self, ids: &[u32], rng: &mut R) -> Result<(SpanScores, Tape)> {
        self.run(ids, Some(rng))
    }

    /// Decodes the highest-scoring tree for `sentence`.
    pub fn parse(&self, sentence: &Sentence) -> Result<Tree> {
        let scores = self.score_spans(&self.encode(sentence))?;
        let bracketing = decoder::decode(&scores)?;
        Tree::new(sentence.clone(), bracketing)
    }

    fn run<R: Rng>(&self, ids: &[u32], mut rng: Option<&mut R>) -> Result<(SpanScores, Tape)> {
        if ids.is_empty() {
            return Err(Error::invalid("cannot score an empty sentence"));
        }
        if let Some(bad) = ids.iter().find(|&&id| id as usize >= self.vocab.len()) {
            return Err(Error::invalid(format!(
                "token id {bad} out of range for vocabulary of {}",
                self.vocab.len()
            )));
        }
        let len = ids.len();
        let n = len + 2;
        let rate = self.config.dropout;
        let p = &self.params;

        let mut seq = Vec::with_capacity(n);
        seq.push(self.vocab.bos_id());
        seq.extend_from_slice(ids);
        seq.push(self.vocab.eos_id());
        let mut inputs = p.embeddings.select(Axis(0), &seq.iter().map(|&i| i as usize).collect::<Vec<_>>());
        let emb_mask = match rng.as_deref_mut() {
            Some(r) if rate > 0.0 => {
                let m = dropout_mask(inputs.dim(), rate, r);
                inputs *= &m;
                Some(m)
            }
            _ => None,
        };

        let side = self.config.side_dim();
        let (states_fwd, states_bwd, encoder) = match &p.dense.encoder {
            EncoderParams::Embedding { positions } => {
                let last = positions.nrows() - 1;
                let mut h = inputs.clone();
                for (t, mut row) in h.rows_mut().into_iter().enumerate() {
                    row += &positions.row(t.min(last));
                }
                let f = h.slice(s![.., ..side]).to_owned();
                let g = h.slice(s![.., side..]).to_owned();
                (f, g, EncoderCache::Embedding)
            }
            EncoderParams::BiLstm { forward, backward } => {
                let fc = lstm::forward(forward, inputs.view());
                let rev = reversed_rows(&inputs);
                let bc = lstm::forward(backward, rev.view());
                let f = fc.hidden.clone();
                let g = reversed_rows(&bc.hidden);
                (
                    f,
                    g,
                    EncoderCache::BiLstm {
                        forward: fc,
                        backward: bc,
                    },
                )
            }
        };

        let fence_fwd = states_fwd.slice(s![..=len, ..]).to_owned();
        let fence_bwd = states_bwd.slice(s![1..=len + 1, ..]).to_owned();
        let head = &p.dense.head;
        let w_fwd = head.hidden.slice(s![.., ..side]);
        let w_bwd = head.hidden.slice(s![.., side..]);
        let u = fence_fwd.dot(&w_fwd.t());
        let v = fence_bwd.dot(&w_bwd.t());

        let ff = self.config.ff_dim;
        let mut scores = SpanScores::zeros(len);
        let hidden_mask = match rng.as_deref_mut() {
            Some(r) if rate > 0.0 => Some(dropout_mask((scores.span_count(), ff), rate, r)),
            _ => None,
        };
        let b1 = head.hidden_bias.as_slice().expect("contiguous");
        let w2 = head.output.as_slice().expect("contiguous");
        let b2 = head.output_bias[0];
        let mut z = vec![0.0; ff];
        for b in 0..len {
            for e in b + 1..=len {
                let (ue, ub, vb, ve) = (u.row(e), u.row(b), v.row(b), v.row(e));
                for k in 0..ff {
                    z[k] = ue[k] - ub[k] + vb[k] - ve[k] + b1[k];
                }
                let idx = scores.index(b, e);
                let mut s = b2;
                match &hidden_mask {
                    Some(m) => {
                        let m = m.row(idx);
                        for k in 0..ff {
                            if z[k] > 0.0 {
                                s += z[k] * m[k] * w2[k];
                            }
                        }
                    }
                    None => {
                        for k in 0..ff {
                            if z[k] > 0.0 {
                                s += z[k] * w2[k];
                            }
                        }
                    }
                }
                scores.values_mut()[idx] = s;
            }
        }
        if !scores.is_finite() {
            return Err(Error::invalid("non-finite span score"));
        }
        let tape = Tape {
            ids: ids.to_vec(),
            signature: self.signature(),
            emb_mask,
            encoder,
            fence_fwd,
            fence_bwd,
            u,
            v,
            hidden_mask,
        };
        Ok((scores, tape))
    }

    /// Gradient of `Σ weights(s) · score(s)` with respect to all parameters.
    pub fn backprop(&self, tape: &Tape, weights: &SpanScores) -> Result<Gradients> {
        if tape.signature != self.signature() {
            return Err(Error::invalid("tape was produced by a different model"));
        }
        let len = tape.ids.len();
        if weights.sentence_len() != len {
            return Err(Error::invalid(format!(
                "span weights cover length {}, tape has {len}",
                weights.sentence_len()
            )));
        }
        let p = &self.params;
        let side = self.config.side_dim();
        let ff = self.config.ff_dim;
        let head = &p.dense.head;
        let mut grad = Gradients::zeros_like(p);

        let b1 = head.hidden_bias.as_slice().expect("contiguous");
        let w2 = head.output.as_slice().expect("contiguous");
        let mut du = Array2::<f64>::zeros(tape.u.dim());
        let mut dv = Array2::<f64>::zeros(tape.v.dim());
        let mut dz = vec![0.0; ff];
        {
            let gh = &mut grad.dense.head;
            let gw2 = gh.output.as_slice_mut().expect("contiguous");
            let mut gb1 = vec![0.0; ff];
            let mut gb2 = 0.0;
            for b in 0..len {
                for e in b + 1..=len {
                    let idx = weights.index(b, e);
                    let w = weights.values()[idx];
                    if w == 0.0 {
                        continue;
                    }
                    gb2 += w;
                    let (ue, ub, vb, ve) =
                        (tape.u.row(e), tape.u.row(b), tape.v.row(b), tape.v.row(e));
                    let mask = tape.hidden_mask.as_ref().map(|m| m.row(idx));
                    for k in 0..ff {
                        let z = ue[k] - ub[k] + vb[k] - ve[k] + b1[k];
                        if z > 0.0 {
                            let m = mask.as_ref().map_or(1.0, |m| m[k]);
                            gw2[k] += w * z * m;
                            dz[k] = w * w2[k] * m;
                        } else {
                            dz[k] = 0.0;
                        }
                    }
                    for k in 0..ff {
                        let d = dz[k];
                        if d != 0.0 {
                            gb1[k] += d;
                            du[[e, k]] += d;
                            du[[b, k]] -= d;
                            dv[[b, k]] += d;
                            dv[[e, k]] -= d;
                        }
                    }
                }
            }
            gh.hidden_bias += &Array1::from(gb1);
            gh.output_bias[0] += gb2;
            gh.hidden
                .slice_mut(s![.., ..side])
                .assign(&du.t().dot(&tape.fence_fwd));
            gh.hidden
                .slice_mut(s![.., side..])
                .assign(&dv.t().dot(&tape.fence_bwd));
        }
        let d_fence_fwd = du.dot(&head.hidden.slice(s![.., ..side]));
        let d_fence_bwd = dv.dot(&head.hidden.slice(s![.., side..]));
        let n = len + 2;
        let mut d_fwd = Array2::<f64>::zeros((n, side));
        let mut d_bwd = Array2::<f64>::zeros((n, side));
        d_fwd.slice_mut(s![..=len, ..]).assign(&d_fence_fwd);
        d_bwd.slice_mut(s![1..=len + 1, ..]).assign(&d_fence_bwd);

        let mut d_inputs = match (&p.dense.encoder, &tape.encoder, &mut grad.dense.encoder) {
            (
                EncoderParams::Embedding { positions },
                EncoderCache::Embedding,
                EncoderParams::Embedding { positions: gpos },
            ) => {
                let last = positions.nrows() - 1;
                let mut dh = Array2::<f64>::zeros((n, 2 * side));
                dh.slice_mut(s![.., ..side]).assign(&d_fwd);
                dh.slice_mut(s![.., side..]).assign(&d_bwd);
                for (t, row) in dh.rows().into_iter().enumerate() {
                    let mut g = gpos.row_mut(t.min(last));
                    g += &row;
                }
                dh
            }
            (
                EncoderParams::BiLstm { forward, backward },
                EncoderCache::BiLstm {
                    forward: fc,
                    backward: bc,
                },
                EncoderParams::BiLstm {
                    forward: gf,
                    backward: gb,
                },
            ) => {
                let dx_f = lstm::backward(forward, fc, d_fwd.view(), gf);
                let d_bwd_rev = reversed_rows(&d_bwd);
                let dx_b = lstm::backward(backward, bc, d_bwd_rev.view(), gb);
                dx_f + reversed_rows(&dx_b)
            }
            _ => return Err(Error::invalid("tape encoder does not match model")),
        };
        if let Some(m) = &tape.emb_mask {
            d_inputs *= m;
        }
        let bos = self.vocab.bos_id();
        let eos = self.vocab.eos_id();
        let seq = std::iter::once(bos)
            .chain(tape.ids.iter().copied())
            .chain(std::iter::once(eos));
        for (t, id) in seq.enumerate() {
            let row = d_inputs.row(t);
            grad.embeddings
                .entry(id)
                .and_modify(|r| *r += &row)
                .or_insert_with(|| row.to_owned());
        }
        Ok(grad)
    }
}
