//! Random disjoint partition of flows into per-device training sets, a
//! shared test set, and per-station unlabeled edge sets.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{DatasetSplit, Flow};
use crate::error::{Error, Result};
use crate::rng::SimRng;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PartitionSpec {
    /// Training flows per device; its length is the device count.
    pub device_flows: Vec<usize>,
    /// Number of edge sets (one per station).
    pub edge_sets: usize,
    /// Unlabeled flows per edge set, sampled from the training pool.
    pub edge_flows: usize,
}

/// Shuffle once, deal the training sets, leave the remainder as the test
/// set, then sample each edge set from the training pool with labels
/// stripped.
pub fn partition(flows: Vec<Flow>, spec: &PartitionSpec, rng: &mut SimRng) -> Result<DatasetSplit> {
    let train_total: usize = spec.device_flows.iter().sum();
    if train_total > flows.len() {
        return Err(Error::InsufficientData { needed: train_total, available: flows.len() });
    }
    if spec.edge_sets > 0 && spec.edge_flows > train_total {
        return Err(Error::InsufficientData { needed: spec.edge_flows, available: train_total });
    }

    let mut pool = flows;
    pool.shuffle(rng);

    let mut device_train = Vec::with_capacity(spec.device_flows.len());
    let mut cursor = 0;
    for &n in &spec.device_flows {
        device_train.push(pool[cursor..cursor + n].to_vec());
        cursor += n;
    }
    let test = pool[cursor..].to_vec();

    let train_pool: Vec<&Flow> = pool[..cursor].iter().collect();
    let mut edge_unlabeled = Vec::with_capacity(spec.edge_sets);
    for _ in 0..spec.edge_sets {
        let mut idx: Vec<usize> = (0..train_pool.len()).collect();
        idx.shuffle(rng);
        let set: Vec<Vec<Vec<f64>>> = idx[..spec.edge_flows]
            .iter()
            .map(|&i| train_pool[i].feature_sequence())
            .collect();
        edge_unlabeled.push(set);
    }

    Ok(DatasetSplit { device_train, test, edge_unlabeled })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{generate_synthetic, SyntheticParams};
    use crate::rng::stream;

    fn flows(n: usize) -> Vec<Flow> {
        let params = SyntheticParams { features: 3, flows: n, class_sep: 1.0, malicious_fraction: 0.5 };
        generate_synthetic(&mut stream(2, "part"), &params)
    }

    #[test]
    fn single_device_takes_all_training_flows() {
        let spec = PartitionSpec { device_flows: vec![40], edge_sets: 0, edge_flows: 0 };
        let split = partition(flows(50), &spec, &mut stream(3, "part")).unwrap();
        assert_eq!(split.device_train.len(), 1);
        assert_eq!(split.device_train[0].len(), 40);
        assert_eq!(split.test.len(), 10);
    }

    #[test]
    fn sizes_and_disjointness() {
        let all = flows(120);
        let spec = PartitionSpec { device_flows: vec![9; 10], edge_sets: 2, edge_flows: 24 };
        let split = partition(all.clone(), &spec, &mut stream(4, "part")).unwrap();
        assert_eq!(split.device_train.iter().map(Vec::len).sum::<usize>(), 90);
        assert_eq!(split.test.len(), 30);
        assert_eq!(split.edge_unlabeled.len(), 2);
        assert_eq!(split.edge_unlabeled[0].len(), 24);

        // train and test together are a permutation of the input, so the
        // two sides are disjoint as multisets
        let count = |fs: &[Flow]| fs.len();
        assert_eq!(
            count(&split.test) + split.device_train.iter().map(|d| count(d)).sum::<usize>(),
            all.len()
        );
        for f in &split.test {
            let in_train = split.device_train.iter().flatten().filter(|g| *g == f).count();
            let dupes = all.iter().filter(|g| *g == f).count();
            assert!(in_train < dupes, "test flow also dealt to a device");
        }
    }

    #[test]
    fn insufficient_data_reported_with_counts() {
        let spec = PartitionSpec { device_flows: vec![100, 100], edge_sets: 0, edge_flows: 0 };
        match partition(flows(50), &spec, &mut stream(5, "part")) {
            Err(Error::InsufficientData { needed, available }) => {
                assert_eq!(needed, 200);
                assert_eq!(available, 50);
            }
            other => panic!("expected insufficient data, got {other:?}"),
        }
    }

    #[test]
    fn deterministic_under_seed() {
        let spec = PartitionSpec { device_flows: vec![10, 10], edge_sets: 1, edge_flows: 5 };
        let a = partition(flows(40), &spec, &mut stream(6, "part")).unwrap();
        let b = partition(flows(40), &spec, &mut stream(6, "part")).unwrap();
        assert_eq!(a.device_train, b.device_train);
        assert_eq!(a.test, b.test);
        assert_eq!(a.edge_unlabeled, b.edge_unlabeled);
    }
}
