//! Loss evaluation and full-batch gradient-descent training.

use super::{grad_bce, LabeledBatch, ModelWeights, PROB_CLAMP};
use crate::error::{Error, Result};

/// Mean binary cross-entropy over the batch, probabilities clamped to
/// [1e-7, 1 - 1e-7] so the loss stays finite.
pub fn loss(w: &ModelWeights, batch: &LabeledBatch) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let mut total = 0.0;
    for (seq, &label) in batch.sequences.iter().zip(&batch.labels) {
        let p = super::forward(w, seq)?.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
        total -= label * p.ln() + (1.0 - label) * (1.0 - p).ln();
    }
    Ok(total / batch.len() as f64)
}

/// One full-batch gradient-descent step: params <- params - lr * grad.
pub fn gd_step(w: &ModelWeights, batch: &LabeledBatch, lr: f64) -> Result<ModelWeights> {
    if lr < 0.0 {
        return Err(Error::Config("learning rate must be >= 0".into()));
    }
    let (_, grad) = grad_bce(w, batch)?;
    let mut next = w.clone();
    for (p, g) in next.params.iter_mut().zip(&grad) {
        *p -= lr * g;
    }
    Ok(next)
}

/// K sequential gradient-descent steps over the full local batch.
pub fn train_local(w: &ModelWeights, batch: &LabeledBatch, lr: f64, k: usize) -> Result<ModelWeights> {
    if k < 1 {
        return Err(Error::Config("iteration count K must be >= 1".into()));
    }
    let mut cur = w.clone();
    for _ in 0..k {
        cur = gd_step(&cur, batch, lr)?;
    }
    Ok(cur)
}
