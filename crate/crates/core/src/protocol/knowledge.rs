//! Knowledge transfer: every slave labels the station's unlabeled edge
//! set and the master trains on each labeled copy, slaves in index
//! order.

use super::EdgeState;
use crate::error::Result;
use crate::nn::{forward, train_local, LabeledBatch, ModelWeights};

/// Threshold turning a slave's output probability into a label.
pub const LABEL_THRESHOLD: f64 = 0.5;

/// Returns the updated master replica; an empty edge set leaves the
/// master unchanged.
pub fn knowledge_transfer(edge: &EdgeState, lr: f64, passes: usize) -> Result<ModelWeights> {
    if edge.edge_data.is_empty() || passes == 0 {
        return Ok(edge.master.clone());
    }
    let mut master = edge.master.clone();
    for slave in &edge.slaves {
        let labels: Vec<f64> = edge
            .edge_data
            .iter()
            .map(|seq| forward(slave, seq).map(|p| f64::from(p > LABEL_THRESHOLD)))
            .collect::<Result<_>>()?;
        let batch = LabeledBatch::new(edge.edge_data.clone(), labels)?;
        master = train_local(&master, &batch, lr, passes)?;
    }
    Ok(master)
}
