//! Parameter tensors and their gradients.

use std::collections::BTreeMap;

use ndarray::{Array1, Array2, ArrayViewD, ArrayViewMutD};
use rand::Rng;

#[derive(Clone, Debug, PartialEq)]
pub struct LstmParams {
    /// `4H × D`, gate order input, forget, cell, output.
    pub input: Array2<f64>,
    /// `4H × H`.
    pub recurrent: Array2<f64>,
    /// `4H`.
    pub bias: Array1<f64>,
}

impl LstmParams {
    pub(crate) fn zeros(input_dim: usize, hidden: usize) -> Self {
        LstmParams {
            input: Array2::zeros((4 * hidden, input_dim)),
            recurrent: Array2::zeros((4 * hidden, hidden)),
            bias: Array1::zeros(4 * hidden),
        }
    }

    pub fn hidden_dim(&self) -> usize {
        self.recurrent.ncols()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum EncoderParams {
    /// Token embedding plus a learned position embedding (`P × D`).
    Embedding { positions: Array2<f64> },
    BiLstm {
        forward: LstmParams,
        backward: LstmParams,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct HeadParams {
    /// `F × feature_dim`.
    pub hidden: Array2<f64>,
    pub hidden_bias: Array1<f64>,
    pub output: Array1<f64>,
    /// Length 1.
    pub output_bias: Array1<f64>,
}

/// Everything except the embedding table.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseParams {
    pub encoder: EncoderParams,
    pub head: HeadParams,
}

impl DenseParams {
    pub fn named(&self) -> Vec<(&'static str, ArrayViewD<'_, f64>)> {
        let mut out = Vec::new();
        match &self.encoder {
            EncoderParams::Embedding { positions } => {
                out.push(("positions", positions.view().into_dyn()));
            }
            EncoderParams::BiLstm { forward, backward } => {
                out.push(("lstm.forward.input", forward.input.view().into_dyn()));
                out.push(("lstm.forward.recurrent", forward.recurrent.view().into_dyn()));
                out.push(("lstm.forward.bias", forward.bias.view().into_dyn()));
                out.push(("lstm.backward.input", backward.input.view().into_dyn()));
                out.push(("lstm.backward.recurrent", backward.recurrent.view().into_dyn()));
                out.push(("lstm.backward.bias", backward.bias.view().into_dyn()));
            }
        }
        let h = &self.head;
        out.push(("head.hidden", h.hidden.view().into_dyn()));
        out.push(("head.hidden_bias", h.hidden_bias.view().into_dyn()));
        out.push(("head.output", h.output.view().into_dyn()));
        out.push(("head.output_bias", h.output_bias.view().into_dyn()));
        out
    }

    pub fn named_mut(&mut self) -> Vec<(&'static str, ArrayViewMutD<'_, f64>)> {
        let mut out = Vec::new();
        match &mut self.encoder {
            EncoderParams::Embedding { positions } => {
                out.push(("positions", positions.view_mut().into_dyn()));
            }
            EncoderParams::BiLstm { forward, backward } => {
                out.push(("lstm.forward.input", forward.input.view_mut().into_dyn()));
                out.push(("lstm.forward.recurrent", forward.recurrent.view_mut().into_dyn()));
                out.push(("lstm.forward.bias", forward.bias.view_mut().into_dyn()));
                out.push(("lstm.backward.input", backward.input.view_mut().into_dyn()));
                out.push(("lstm.backward.recurrent", backward.recurrent.view_mut().into_dyn()));
                out.push(("lstm.backward.bias", backward.bias.view_mut().into_dyn()));
            }
        }
        let h = &mut self.head;
        out.push(("head.hidden", h.hidden.view_mut().into_dyn()));
        out.push(("head.hidden_bias", h.hidden_bias.view_mut().into_dyn()));
        out.push(("head.output", h.output.view_mut().into_dyn()));
        out.push(("head.output_bias", h.output_bias.view_mut().into_dyn()));
        out
    }

    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        z.fill(0.0);
        z
    }

    pub fn fill(&mut self, value: f64) {
        for (_, mut t) in self.named_mut() {
            t.fill(value);
        }
    }

    pub fn add_assign(&mut self, other: &DenseParams) {
        for ((_, mut a), (_, b)) in self.named_mut().into_iter().zip(other.named()) {
            a += &b;
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for (_, mut t) in self.named_mut() {
            t *= factor;
        }
    }

    pub fn len(&self) -> usize {
        self.named().iter().map(|(_, t)| t.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// All learnable parameters of a scorer.
#[derive(Clone, Debug, PartialEq)]
pub struct Parameters {
    /// `V × D`.
    pub embeddings: Array2<f64>,
    pub dense: DenseParams,
}

impl Parameters {
    pub fn named(&self) -> Vec<(&'static str, ArrayViewD<'_, f64>)> {
        let mut out = vec![("embeddings", self.embeddings.view().into_dyn())];
        out.extend(self.dense.named());
        out
    }

    pub fn named_mut(&mut self) -> Vec<(&'static str, ArrayViewMutD<'_, f64>)> {
        let mut out = vec![("embeddings", self.embeddings.view_mut().into_dyn())];
        out.extend(self.dense.named_mut());
        out
    }

    /// Total number of scalar parameters.
    pub fn len(&self) -> usize {
        self.embeddings.len() + self.dense.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Scalar at flat position `i` (tensors in [`named`](Self::named) order, row-major).
    pub fn get(&self, mut i: usize) -> f64 {
        for (_, t) in self.named() {
            if i < t.len() {
                return *t.as_slice().expect("standard layout").get(i).unwrap();
            }
            i -= t.len();
        }
        panic!("parameter index out of range")
    }

    pub fn set(&mut self, mut i: usize, value: f64) {
        for (_, mut t) in self.named_mut() {
            if i < t.len() {
                t.as_slice_mut().expect("standard layout")[i] = value;
                return;
            }
            i -= t.len();
        }
        panic!("parameter index out of range")
    }

    /// Name of the tensor holding flat position `i`, and the offset within it.
    pub fn locate(&self, mut i: usize) -> (&'static str, usize) {
        for (name, t) in self.named() {
            if i < t.len() {
                return (name, i);
            }
            i -= t.len();
        }
        panic!("parameter index out of range")
    }

    pub fn fill(&mut self, value: f64) {
        self.embeddings.fill(value);
        self.dense.fill(value);
    }

    pub(crate) fn fill_uniform<R: Rng>(t: &mut ArrayViewMutD<'_, f64>, bound: f64, rng: &mut R) {
        for v in t.iter_mut() {
            *v = rng.gen_range(-bound..=bound);
        }
    }
}

/// Gradient of a scalar objective with respect to [`Parameters`].
///
/// Embedding rows are stored sparsely since one sentence touches only a few.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    pub embeddings: BTreeMap<u32, Array1<f64>>,
    pub dense: DenseParams,
}

impl Gradients {
    pub fn zeros_like(params: &Parameters) -> Self {
        Gradients {
            embeddings: BTreeMap::new(),
            dense: params.dense.zeros_like(),
        }
    }

    pub fn add_assign(&mut self, other: &Gradients) {
        for (id, row) in &other.embeddings {
            match self.embeddings.get_mut(id) {
                Some(r) => *r += row,
                None => {
                    self.embeddings.insert(*id, row.clone());
                }
            }
        }
        self.dense.add_assign(&other.dense);
    }

    pub fn scale(&mut self, factor: f64) {
        for row in self.embeddings.values_mut() {
            *row *= factor;
        }
        self.dense.scale(factor);
    }

    /// Component at flat position `i`, using the layout of `params`.
    pub fn get(&self, params: &Parameters, i: usize) -> f64 {
        let emb = params.embeddings.len();
        if i < emb {
            let dim = params.embeddings.ncols();
            let row = (i / dim) as u32;
            return self.embeddings.get(&row).map_or(0.0, |r| r[i % dim]);
        }
        let mut j = i - emb;
        for (_, t) in self.dense.named() {
            if j < t.len() {
                return t.as_slice().expect("standard layout")[j];
            }
            j -= t.len();
        }
        panic!("gradient index out of range")
    }

    pub fn is_zero(&self) -> bool {
        self.embeddings.values().all(|r| r.iter().all(|v| *v == 0.0))
            && self.dense.named().iter().all(|(_, t)| t.iter().all(|v| *v == 0.0))
    }

    /// Largest absolute component.
    pub fn max_abs(&self) -> f64 {
        let emb = self
            .embeddings
            .values()
            .flat_map(|r| r.iter())
            .fold(0.0f64, |m, v| m.max(v.abs()));
        self.dense
            .named()
            .iter()
            .flat_map(|(_, t)| t.iter().copied().collect::<Vec<_>>())
            .fold(emb, |m, v| m.max(v.abs()))
    }
}
