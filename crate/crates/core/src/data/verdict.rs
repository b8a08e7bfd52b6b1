//! Flow-level verdicts from per-packet probabilities, and model accuracy
//! over a labeled test set.

use super::Flow;
use crate::error::{Error, Result};
use crate::nn::{forward_steps, ModelWeights};

pub const DEFAULT_PACKET_THRESHOLD: f64 = 0.5;
pub const DEFAULT_RATIO_THRESHOLD: f64 = 0.7;

/// A packet is malicious when its probability exceeds
/// `packet_threshold`; the flow is malicious when the malicious-packet
/// ratio is strictly greater than `ratio_threshold`.
pub fn flow_verdict(packet_probs: &[f64], packet_threshold: f64, ratio_threshold: f64) -> u8 {
    let flagged = packet_probs.iter().filter(|&&p| p > packet_threshold).count();
    u8::from(flagged as f64 / packet_probs.len() as f64 > ratio_threshold)
}

/// Fraction of test flows whose verdict matches the flow label. The
/// model scores each packet from the observations up to it.
pub fn evaluate_accuracy(weights: &ModelWeights, test: &[Flow]) -> Result<f64> {
    if test.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let mut correct = 0usize;
    for flow in test {
        let probs = forward_steps(weights, &flow.feature_sequence())?;
        let verdict = flow_verdict(&probs, DEFAULT_PACKET_THRESHOLD, DEFAULT_RATIO_THRESHOLD);
        correct += usize::from(verdict == flow.label);
    }
    Ok(correct as f64 / test.len() as f64)
}
