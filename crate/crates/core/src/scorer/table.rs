use crate::error::{Error, Result};
use crate::treebank::Span;

/// One value per span `(b, e)` with `0 ≤ b < e ≤ L`, stored as an upper triangle.
///
/// Used both for the NT scores produced by the scorer and for the span
/// weights fed back into [`ScorerModel::backprop`](super::ScorerModel::backprop).
#[derive(Clone, Debug, PartialEq)]
pub struct SpanScores {
    len: usize,
    values: Vec<f64>,
}

impl SpanScores {
    pub fn zeros(len: usize) -> Self {
        SpanScores {
            len,
            values: vec![0.0; len * (len + 1) / 2],
        }
    }

    pub fn from_fn(len: usize, mut f: impl FnMut(Span) -> f64) -> Self {
        let mut table = SpanScores::zeros(len);
        for b in 0..len {
            for e in b + 1..=len {
                let idx = table.index(b, e);
                table.values[idx] = f(Span::new(b, e));
            }
        }
        table
    }

    /// Sentence length `L`.
    pub fn sentence_len(&self) -> usize {
        self.len
    }

    /// Number of spans, `L(L+1)/2`.
    pub fn span_count(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub(crate) fn index(&self, b: usize, e: usize) -> usize {
        debug_assert!(b < e && e <= self.len, "span ({b}, {e}) out of range");
        b * (2 * self.len + 1 - b) / 2 + (e - b - 1)
    }

    #[inline]
    pub fn get(&self, span: Span) -> f64 {
        self.values[self.index(span.begin, span.end)]
    }

    pub fn try_get(&self, span: Span) -> Result<f64> {
        if span.begin >= span.end || span.end > self.len {
            return Err(Error::invalid(format!(
                "span {span} out of range for length {}",
                self.len
            )));
        }
        Ok(self.get(span))
    }

    #[inline]
    pub fn set(&mut self, span: Span, value: f64) {
        let idx = self.index(span.begin, span.end);
        self.values[idx] = value;
    }

    #[inline]
    pub fn add(&mut self, span: Span, value: f64) {
        let idx = self.index(span.begin, span.end);
        self.values[idx] += value;
    }

    pub fn iter(&self) -> impl Iterator<Item = (Span, f64)> + '_ {
        let len = self.len;
        (0..len)
            .flat_map(move |b| (b + 1..=len).map(move |e| Span::new(b, e)))
            .map(move |s| (s, self.get(s)))
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}
