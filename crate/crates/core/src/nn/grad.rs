//! Analytic gradients: backpropagation through time for the gated cell,
//! plain backprop for the dense trunk. Checked against central finite
//! differences in `tests/gradient_check.rs` and the acceptance suite.

use super::forward::{dense_trunk, gru_trace, head_logits, softmax, GruTrace};
use super::{sigmoid, CellKind, Layout, ModelSpec, ModelWeights, PROB_CLAMP};
use crate::error::{Error, Result};

/// Flat gradient accumulator sharing the weight layout.
struct Grad {
    lay: Layout,
    spec: ModelSpec,
    g: Vec<f64>,
}

impl Grad {
    fn new(spec: &ModelSpec) -> Self {
        Self {
            lay: Layout::of(spec),
            spec: spec.clone(),
            g: vec![0.0; spec.param_count()],
        }
    }

    /// Name of the tensor containing flat index `idx`.
    fn tensor_of(&self, idx: usize) -> String {
        let mut off = 0;
        for (name, dims) in self.spec.shape_map() {
            let len: usize = dims.iter().product();
            if idx < off + len {
                return name;
            }
            off += len;
        }
        "unknown".into()
    }

    fn check_finite(&self) -> Result<()> {
        for (i, v) in self.g.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFiniteGradient {
                    tensor: self.tensor_of(i),
                });
            }
        }
        Ok(())
    }
}

/// Backpropagate `d_h` (gradient at the final hidden state) through the
/// recorded recurrence, accumulating into `grad`.
fn backprop_gru(w: &ModelWeights, trace: &GruTrace, d_h_final: &[f64], grad: &mut Grad) {
    let h = w.spec.hidden_dim;
    let i = w.spec.input_dim;
    let p = &w.params;
    let o = &grad.lay.offsets;
    let (wz, uz, bz, wr, ur, br, wc, uc, bc) =
        (o[0], o[1], o[2], o[3], o[4], o[5], o[6], o[7], o[8]);

    let mut d_h = d_h_final.to_vec();
    for step in trace.steps.iter().rev() {
        let (x, h_prev, z, r, c) = (&step.x, &step.h_prev, &step.z, &step.r, &step.c);
        let mut d_h_prev = vec![0.0; h];
        let mut daz = vec![0.0; h];
        let mut dac = vec![0.0; h];

        for k in 0..h {
            // h_t = (1 - z) h_prev + z c
            let dz = d_h[k] * (c[k] - h_prev[k]);
            let dc = d_h[k] * z[k];
            d_h_prev[k] += d_h[k] * (1.0 - z[k]);
            daz[k] = dz * z[k] * (1.0 - z[k]);
            dac[k] = dc * (1.0 - c[k] * c[k]);
        }

        // candidate gate: ac = Wc x + Uc (r .* h_prev) + bc
        let mut d_rh = vec![0.0; h];
        for k in 0..h {
            grad.g[bc + k] += dac[k];
            for j in 0..i {
                grad.g[wc + k * i + j] += dac[k] * x[j];
            }
            for j in 0..h {
                grad.g[uc + k * h + j] += dac[k] * (r[j] * h_prev[j]);
                d_rh[j] += p[uc + k * h + j] * dac[k];
            }
        }
        let mut dar = vec![0.0; h];
        for j in 0..h {
            let dr = d_rh[j] * h_prev[j];
            d_h_prev[j] += d_rh[j] * r[j];
            dar[j] = dr * r[j] * (1.0 - r[j]);
        }

        // reset and update gates
        for k in 0..h {
            grad.g[br + k] += dar[k];
            grad.g[bz + k] += daz[k];
            for j in 0..i {
                grad.g[wr + k * i + j] += dar[k] * x[j];
                grad.g[wz + k * i + j] += daz[k] * x[j];
            }
            for j in 0..h {
                grad.g[ur + k * h + j] += dar[k] * h_prev[j];
                grad.g[uz + k * h + j] += daz[k] * h_prev[j];
                d_h_prev[j] += p[ur + k * h + j] * dar[k] + p[uz + k * h + j] * daz[k];
            }
        }

        d_h = d_h_prev;
    }
}

/// Accumulate head gradients for `d_logits` over `feat`; returns the
/// gradient flowing back into the head input.
fn backprop_head(w: &ModelWeights, feat: &[f64], d_logits: &[f64], grad: &mut Grad) -> Vec<f64> {
    let o = w.spec.output_dim;
    let (woff, len) = w.tensor_range("w_out").expect("head present");
    let (boff, _) = w.tensor_range("b_out").expect("head present");
    let width = len / o;
    let mut d_feat = vec![0.0; width];
    for k in 0..o {
        grad.g[boff + k] += d_logits[k];
        for j in 0..width {
            grad.g[woff + k * width + j] += d_logits[k] * feat[j];
            d_feat[j] += w.params[woff + k * width + j] * d_logits[k];
        }
    }
    d_feat
}

/// Dense trunk backward: tanh hidden layer (a no-op when hidden_dim = 0).
fn backprop_dense_trunk(w: &ModelWeights, x: &[f64], act: &Option<Vec<f64>>, d_feat: &[f64], grad: &mut Grad) {
    let Some(act) = act else { return };
    let h = w.spec.hidden_dim;
    let i = w.spec.input_dim;
    let (wh, bh) = (grad.lay.offsets[0], grad.lay.offsets[1]);
    for k in 0..h {
        let da = d_feat[k] * (1.0 - act[k] * act[k]);
        grad.g[bh + k] += da;
        for j in 0..i {
            grad.g[wh + k * i + j] += da * x[j];
        }
    }
}

/// Per-sequence binary cross-entropy and the gradient at the head logit.
/// The probability is clamped for the loss; outside the clamp interval
/// the loss is locally constant in the logit, so the gradient is zero
/// there (this keeps the analytic gradient equal to finite differences
/// of the actual computed loss).
fn bce_at_logit(logit: f64, label: f64) -> (f64, f64) {
    let p = sigmoid(logit);
    let p_hat = p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
    let loss = -(label * p_hat.ln() + (1.0 - label) * (1.0 - p_hat).ln());
    let d_logit = if p > PROB_CLAMP && p < 1.0 - PROB_CLAMP {
        p - label
    } else {
        0.0
    };
    (loss, d_logit)
}

/// Mean binary cross-entropy over the batch and its gradient.
pub fn grad_bce(w: &ModelWeights, batch: &super::LabeledBatch) -> Result<(f64, Vec<f64>)> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    if w.spec.output_dim != 1 {
        return Err(Error::DimensionMismatch {
            what: format!("scalar head of {}", w.spec.model_id),
            expected: 1,
            got: w.spec.output_dim,
        });
    }
    let mut grad = Grad::new(&w.spec);
    let mut total = 0.0;
    for (seq, &label) in batch.sequences.iter().zip(&batch.labels) {
        if seq.is_empty() {
            return Err(Error::EmptyBatch);
        }
        match w.spec.cell {
            CellKind::RecurrentGated => {
                let trace = gru_trace(w, seq)?;
                let logit = head_logits(w, &trace.h_final)[0];
                let (loss, d_logit) = bce_at_logit(logit, label);
                total += loss;
                let d_feat = backprop_head(w, &trace.h_final, &[d_logit], &mut grad);
                backprop_gru(w, &trace, &d_feat, &mut grad);
            }
            CellKind::DenseOnly => {
                let (x, act) = dense_trunk(w, seq.last().unwrap())?;
                let feat = act.clone().unwrap_or_else(|| x.clone());
                let logit = head_logits(w, &feat)[0];
                let (loss, d_logit) = bce_at_logit(logit, label);
                total += loss;
                let d_feat = backprop_head(w, &feat, &[d_logit], &mut grad);
                backprop_dense_trunk(w, &x, &act, &d_feat, &mut grad);
            }
        }
    }
    let n = batch.len() as f64;
    for g in grad.g.iter_mut() {
        *g /= n;
    }
    grad.check_finite()?;
    Ok((total / n, grad.g))
}

/// Squared error of the chosen softmax head against a regression target,
/// with its gradient. Used for the Bellman update of the policy networks.
pub fn grad_q_regression(
    w: &ModelWeights,
    input: &[f64],
    chosen: usize,
    target: f64,
) -> Result<(f64, Vec<f64>)> {
    if !target.is_finite() {
        return Err(Error::NonFinite("regression target".into()));
    }
    if chosen >= w.spec.output_dim {
        return Err(Error::DimensionMismatch {
            what: "chosen head index".into(),
            expected: w.spec.output_dim,
            got: chosen,
        });
    }
    let mut grad = Grad::new(&w.spec);

    let (feat, trunk) = match w.spec.cell {
        CellKind::RecurrentGated => {
            let trace = gru_trace(w, &[input.to_vec()])?;
            (trace.h_final.clone(), Err(trace))
        }
        CellKind::DenseOnly => {
            let (x, act) = dense_trunk(w, input)?;
            let feat = act.clone().unwrap_or_else(|| x.clone());
            (feat, Ok((x, act)))
        }
    };
    let logits = head_logits(w, &feat);
    let q = softmax(&logits);
    let err = q[chosen] - target;
    let loss = err * err;

    // d loss / d logits through the softmax Jacobian row of `chosen`
    let dq = 2.0 * err;
    let d_logits: Vec<f64> = (0..q.len())
        .map(|k| {
            let delta = if k == chosen { 1.0 } else { 0.0 };
            dq * q[chosen] * (delta - q[k])
        })
        .collect();

    let d_feat = backprop_head(w, &feat, &d_logits, &mut grad);
    match trunk {
        Ok((x, act)) => backprop_dense_trunk(w, &x, &act, &d_feat, &mut grad),
        Err(trace) => backprop_gru(w, &trace, &d_feat, &mut grad),
    }
    grad.check_finite()?;
    Ok((loss, grad.g))
}
