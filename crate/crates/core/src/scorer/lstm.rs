//! Single-direction LSTM with an explicit backward pass.

use ndarray::{s, Array1, Array2, ArrayView2, Axis};

use super::params::LstmParams;

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Activations kept for the backward pass, rows in processing order.
#[derive(Clone, Debug)]
pub(crate) struct LstmCache {
    input: Array2<f64>,
    /// Post-activation gates `[i, f, g, o]`, `n × 4H`.
    gates: Array2<f64>,
    cell: Array2<f64>,
    cell_tanh: Array2<f64>,
    pub(crate) hidden: Array2<f64>,
}

/// Runs the LSTM over the rows of `input`, starting from zero state.
pub(crate) fn forward(p: &LstmParams, input: ArrayView2<'_, f64>) -> LstmCache {
    let n = input.nrows();
    let h = p.hidden_dim();
    let mut pre = input.dot(&p.input.t());
    pre += &p.bias;
    let mut gates = Array2::zeros((n, 4 * h));
    let mut cell = Array2::zeros((n, h));
    let mut cell_tanh = Array2::zeros((n, h));
    let mut hidden = Array2::<f64>::zeros((n, h));
    let mut h_prev = Array1::<f64>::zeros(h);
    let mut c_prev = Array1::<f64>::zeros(h);
    for t in 0..n {
        let z = &pre.row(t) + &p.recurrent.dot(&h_prev);
        let mut g_row = gates.row_mut(t);
        for k in 0..h {
            let i = sigmoid(z[k]);
            let f = sigmoid(z[h + k]);
            let g = z[2 * h + k].tanh();
            let o = sigmoid(z[3 * h + k]);
            g_row[k] = i;
            g_row[h + k] = f;
            g_row[2 * h + k] = g;
            g_row[3 * h + k] = o;
            let c = f * c_prev[k] + i * g;
            let tc = c.tanh();
            cell[[t, k]] = c;
            cell_tanh[[t, k]] = tc;
            hidden[[t, k]] = o * tc;
        }
        h_prev.assign(&hidden.row(t));
        c_prev.assign(&cell.row(t));
    }
    LstmCache {
        input: input.to_owned(),
        gates,
        cell,
        cell_tanh,
        hidden,
    }
}

/// Backpropagates `d_hidden` (gradient w.r.t. every output row).
///
/// Accumulates parameter gradients into `grad` and returns the gradient
/// w.r.t. the input rows.
pub(crate) fn backward(
    p: &LstmParams,
    cache: &LstmCache,
    d_hidden: ArrayView2<'_, f64>,
    grad: &mut LstmParams,
) -> Array2<f64> {
    let n = cache.hidden.nrows();
    let h = p.hidden_dim();
    let mut d_pre = Array2::<f64>::zeros((n, 4 * h));
    let mut dh_next = Array1::<f64>::zeros(h);
    let mut dc_next = Array1::<f64>::zeros(h);
    for t in (0..n).rev() {
        let gates = cache.gates.row(t);
        let mut dz = d_pre.row_mut(t);
        for k in 0..h {
            let (i, f, g, o) = (gates[k], gates[h + k], gates[2 * h + k], gates[3 * h + k]);
            let tc = cache.cell_tanh[[t, k]];
            let c_prev = if t > 0 { cache.cell[[t - 1, k]] } else { 0.0 };
            let dh = d_hidden[[t, k]] + dh_next[k];
            let dc = dh * o * (1.0 - tc * tc) + dc_next[k];
            dz[k] = dc * g * i * (1.0 - i);
            dz[h + k] = dc * c_prev * f * (1.0 - f);
            dz[2 * h + k] = dc * i * (1.0 - g * g);
            dz[3 * h + k] = dh * tc * o * (1.0 - o);
            dc_next[k] = dc * f;
        }
        dh_next = p.recurrent.t().dot(&dz);
    }
    grad.input += &d_pre.t().dot(&cache.input);
    if n > 1 {
        let prev = cache.hidden.slice(s![..n - 1, ..]);
        grad.recurrent += &d_pre.slice(s![1.., ..]).t().dot(&prev);
    }
    grad.bias += &d_pre.sum_axis(Axis(0));
    d_pre.dot(&p.input)
}
