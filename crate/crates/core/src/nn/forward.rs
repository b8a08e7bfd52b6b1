//! Forward evaluation for both cell families.
//!
//! The recurrent cell is the standard 3-gate formulation:
//!   z_t = sigmoid(Wz x_t + Uz h_{t-1} + bz)
//!   r_t = sigmoid(Wr x_t + Ur h_{t-1} + br)
//!   c_t = tanh(Wc x_t + Uc (r_t .* h_{t-1}) + bc)
//!   h_t = (1 - z_t) .* h_{t-1} + z_t .* c_t
//! with h_0 = 0. The head is a dense layer over the final (or per-step)
//! hidden state: sigmoid for a scalar output, softmax for a vector.

use super::{sigmoid, CellKind, Layout, ModelWeights};
use crate::error::{Error, Result};

/// Per-step cache retained for backpropagation through time.
#[derive(Debug, Clone)]
pub(crate) struct StepCache {
    pub x: Vec<f64>,
    pub h_prev: Vec<f64>,
    pub z: Vec<f64>,
    pub r: Vec<f64>,
    pub c: Vec<f64>,
}

#[derive(Debug, Clone)]
pub(crate) struct GruTrace {
    pub steps: Vec<StepCache>,
    pub h_final: Vec<f64>,
}

fn check_input_dim(w: &ModelWeights, x: &[f64]) -> Result<()> {
    if x.len() != w.spec.input_dim {
        return Err(Error::DimensionMismatch {
            what: format!("input to {}", w.spec.model_id),
            expected: w.spec.input_dim,
            got: x.len(),
        });
    }
    Ok(())
}

/// One gated step; returns the next hidden state and the gate cache.
fn gru_step(w: &ModelWeights, lay: &Layout, x: &[f64], h_prev: &[f64]) -> StepCache {
    let h = w.spec.hidden_dim;
    let i = w.spec.input_dim;
    let p = &w.params;
    let [wz, uz, bz, wr, ur, br, wc, uc, bc] = [
        lay.offsets[0],
        lay.offsets[1],
        lay.offsets[2],
        lay.offsets[3],
        lay.offsets[4],
        lay.offsets[5],
        lay.offsets[6],
        lay.offsets[7],
        lay.offsets[8],
    ];

    let mut z = vec![0.0; h];
    let mut r = vec![0.0; h];
    for k in 0..h {
        let mut az = p[bz + k];
        let mut ar = p[br + k];
        for j in 0..i {
            az += p[wz + k * i + j] * x[j];
            ar += p[wr + k * i + j] * x[j];
        }
        for j in 0..h {
            az += p[uz + k * h + j] * h_prev[j];
            ar += p[ur + k * h + j] * h_prev[j];
        }
        z[k] = sigmoid(az);
        r[k] = sigmoid(ar);
    }

    let mut c = vec![0.0; h];
    for k in 0..h {
        let mut ac = p[bc + k];
        for j in 0..i {
            ac += p[wc + k * i + j] * x[j];
        }
        for j in 0..h {
            ac += p[uc + k * h + j] * (r[j] * h_prev[j]);
        }
        c[k] = ac.tanh();
    }

    StepCache {
        x: x.to_vec(),
        h_prev: h_prev.to_vec(),
        z,
        r,
        c,
    }
}

fn next_hidden(cache: &StepCache) -> Vec<f64> {
    cache
        .h_prev
        .iter()
        .zip(&cache.z)
        .zip(&cache.c)
        .map(|((hp, z), c)| (1.0 - z) * hp + z * c)
        .collect()
}

/// Run the recurrent cell over a sequence, keeping per-step caches.
pub(crate) fn gru_trace(w: &ModelWeights, seq: &[Vec<f64>]) -> Result<GruTrace> {
    let mut h = vec![0.0; w.spec.hidden_dim];
    let lay = Layout::of(&w.spec);
    let mut steps = Vec::with_capacity(seq.len());
    for x in seq {
        check_input_dim(w, x)?;
        let cache = gru_step(w, &lay, x, &h);
        h = next_hidden(&cache);
        steps.push(cache);
    }
    Ok(GruTrace { steps, h_final: h })
}

/// Dense trunk: returns (trunk input, hidden activation) where the head
/// consumes the hidden activation (or the raw input when hidden_dim = 0).
pub(crate) fn dense_trunk(w: &ModelWeights, x: &[f64]) -> Result<(Vec<f64>, Option<Vec<f64>>)> {
    check_input_dim(w, x)?;
    let h = w.spec.hidden_dim;
    if h == 0 {
        return Ok((x.to_vec(), None));
    }
    let i = w.spec.input_dim;
    let lay = Layout::of(&w.spec);
    let (wh, bh) = (lay.offsets[0], lay.offsets[1]);
    let mut act = vec![0.0; h];
    for k in 0..h {
        let mut a = w.params[bh + k];
        for j in 0..i {
            a += w.params[wh + k * i + j] * x[j];
        }
        act[k] = a.tanh();
    }
    Ok((x.to_vec(), Some(act)))
}

/// Features the head reads, for either cell family. A dense-only model
/// consumes the final frame of the sequence.
pub(crate) fn head_input(w: &ModelWeights, seq: &[Vec<f64>]) -> Result<Vec<f64>> {
    if seq.is_empty() {
        return Err(Error::EmptyBatch);
    }
    match w.spec.cell {
        CellKind::RecurrentGated => Ok(gru_trace(w, seq)?.h_final),
        CellKind::DenseOnly => {
            let (x, act) = dense_trunk(w, seq.last().unwrap())?;
            Ok(act.unwrap_or(x))
        }
    }
}

/// Head logits over an arbitrary feature vector.
pub(crate) fn head_logits(w: &ModelWeights, feat: &[f64]) -> Vec<f64> {
    let o = w.spec.output_dim;
    let (off, len) = w.tensor_range("w_out").expect("head present");
    let (boff, _) = w.tensor_range("b_out").expect("head present");
    let width = len / o;
    debug_assert_eq!(width, feat.len());
    (0..o)
        .map(|k| {
            let mut a = w.params[boff + k];
            for j in 0..width {
                a += w.params[off + k * width + j] * feat[j];
            }
            a
        })
        .collect()
}

pub(crate) fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Probability that the sequence is malicious, from the final step.
pub fn forward(w: &ModelWeights, seq: &[Vec<f64>]) -> Result<f64> {
    if w.spec.output_dim != 1 {
        return Err(Error::DimensionMismatch {
            what: format!("scalar head of {}", w.spec.model_id),
            expected: 1,
            got: w.spec.output_dim,
        });
    }
    let feat = head_input(w, seq)?;
    Ok(sigmoid(head_logits(w, &feat)[0]))
}

/// Per-step probabilities: the head applied to every intermediate hidden
/// state, so step t depends only on observations 1..=t.
pub fn forward_steps(w: &ModelWeights, seq: &[Vec<f64>]) -> Result<Vec<f64>> {
    if w.spec.output_dim != 1 {
        return Err(Error::DimensionMismatch {
            what: format!("scalar head of {}", w.spec.model_id),
            expected: 1,
            got: w.spec.output_dim,
        });
    }
    if seq.is_empty() {
        return Err(Error::EmptyBatch);
    }
    match w.spec.cell {
        CellKind::RecurrentGated => {
            let mut h = vec![0.0; w.spec.hidden_dim];
            let lay = Layout::of(&w.spec);
            let mut out = Vec::with_capacity(seq.len());
            for x in seq {
                check_input_dim(w, x)?;
                let cache = gru_step(w, &lay, x, &h);
                h = next_hidden(&cache);
                out.push(sigmoid(head_logits(w, &h)[0]));
            }
            Ok(out)
        }
        CellKind::DenseOnly => seq
            .iter()
            .map(|x| {
                let (raw, act) = dense_trunk(w, x)?;
                let feat = act.unwrap_or(raw);
                Ok(sigmoid(head_logits(w, &feat)[0]))
            })
            .collect(),
    }
}

/// Softmax distribution over the output heads for a single feature vector.
pub fn softmax_head(w: &ModelWeights, input: &[f64]) -> Result<Vec<f64>> {
    let feat = head_input(w, &[input.to_vec()])?;
    Ok(softmax(&head_logits(w, &feat)))
}
