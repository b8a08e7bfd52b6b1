//! Seeded synthetic flow generator: class-conditional Gaussian packet
//! features (means +/- class_sep per dimension, unit variance) with
//! within-flow label persistence. Output is min-max normalized per
//! feature column, matching what the CSV loader produces.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{Flow, PacketRecord, FLOW_LEN, MALICIOUS_MIN_PACKETS};
use crate::rng::SimRng;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SyntheticParams {
    pub features: usize,
    pub flows: usize,
    /// Distance of each class mean from zero, per dimension.
    pub class_sep: f64,
    pub malicious_fraction: f64,
}

impl Default for SyntheticParams {
    fn default() -> Self {
        Self { features: 87, flows: 1200, class_sep: 3.0, malicious_fraction: 0.5 }
    }
}

/// Min-max normalize every feature column in place across the whole
/// dataset; a constant column maps to zero. Idempotent: a second pass
/// leaves already-normalized data unchanged.
pub fn normalize_flows(flows: &mut [Flow]) {
    let Some(first) = flows.first() else { return };
    let dim = first.packets[0].features.len();
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for flow in flows.iter() {
        for p in &flow.packets {
            for (j, &v) in p.features.iter().enumerate() {
                lo[j] = lo[j].min(v);
                hi[j] = hi[j].max(v);
            }
        }
    }
    for flow in flows.iter_mut() {
        for p in &mut flow.packets {
            for (j, v) in p.features.iter_mut().enumerate() {
                let range = hi[j] - lo[j];
                *v = if range > 0.0 { (*v - lo[j]) / range } else { 0.0 };
            }
        }
    }
}

/// Generate `params.flows` ten-packet flows. A malicious flow carries at
/// least eight malicious packets, a benign one at most two, so every
/// flow label agrees with the strict 0.7 ratio rule.
pub fn generate_synthetic(rng: &mut SimRng, params: &SyntheticParams) -> Vec<Flow> {
    let normal = Normal::new(0.0, 1.0).expect("unit variance");
    let mut flows = Vec::with_capacity(params.flows);
    for _ in 0..params.flows {
        let malicious = rng.random_range(0.0..1.0) < params.malicious_fraction;
        let n_mal = if malicious {
            rng.random_range(MALICIOUS_MIN_PACKETS..=FLOW_LEN)
        } else {
            rng.random_range(0..=2)
        };
        let mut slots: Vec<usize> = (0..FLOW_LEN).collect();
        slots.shuffle(rng);
        let mal_slots = &slots[..n_mal];

        let packets = (0..FLOW_LEN)
            .map(|i| {
                let label = u8::from(mal_slots.contains(&i));
                let mean = if label == 1 { params.class_sep } else { -params.class_sep };
                let features = (0..params.features)
                    .map(|_| mean + normal.sample(rng))
                    .collect();
                PacketRecord { features, label }
            })
            .collect();
        flows.push(Flow { packets, label: u8::from(malicious) });
    }
    normalize_flows(&mut flows);
    flows
}
