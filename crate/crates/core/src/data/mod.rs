//! Flow-structured binary-classification data: a seeded synthetic
//! traffic generator, CSV ingestion for real flow-feature exports,
//! device partitioning, and flow-level verdicts.

mod csvio;
mod partition;
mod synthetic;
mod verdict;

pub use csvio::{load_csv, write_csv, CsvSchema};
pub use partition::{partition, PartitionSpec};
pub use synthetic::{generate_synthetic, normalize_flows, SyntheticParams};
pub use verdict::{evaluate_accuracy, flow_verdict, DEFAULT_PACKET_THRESHOLD, DEFAULT_RATIO_THRESHOLD};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::LabeledBatch;

/// Packets per flow.
pub const FLOW_LEN: usize = 10;

/// Minimum malicious packets in a malicious flow (label persistence).
pub const MALICIOUS_MIN_PACKETS: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PacketRecord {
    pub features: Vec<f64>,
    pub label: u8,
}

/// A ten-packet flow. Its label follows the ratio rule: malicious iff
/// strictly more than `DEFAULT_RATIO_THRESHOLD` of its packets are.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Flow {
    pub packets: Vec<PacketRecord>,
    pub label: u8,
}

impl Flow {
    pub fn feature_sequence(&self) -> Vec<Vec<f64>> {
        self.packets.iter().map(|p| p.features.clone()).collect()
    }

    pub fn malicious_packet_ratio(&self) -> f64 {
        let m = self.packets.iter().filter(|p| p.label == 1).count();
        m as f64 / self.packets.len() as f64
    }
}

/// Per-device labeled training sets, a shared labeled test set, and
/// per-station unlabeled edge sets (feature sequences only).
#[derive(Debug, Clone)]
pub struct DatasetSplit {
    pub device_train: Vec<Vec<Flow>>,
    pub test: Vec<Flow>,
    pub edge_unlabeled: Vec<Vec<Vec<Vec<f64>>>>,
}

/// Flows as a training batch: one sequence and one binary label each.
pub fn flows_to_batch(flows: &[Flow]) -> Result<LabeledBatch> {
    if flows.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let sequences = flows.iter().map(Flow::feature_sequence).collect();
    let labels = flows.iter().map(|f| f.label as f64).collect();
    LabeledBatch::new(sequences, labels)
}
