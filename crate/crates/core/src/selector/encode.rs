//! MDP state encoding.

use super::StateFeatures;
use crate::net::NetworkSnapshot;
use crate::protocol::AssignmentPlan;

/// Concatenate the normalized uplink rate matrix (device-major) with the
/// previous plan's per-device one-hot blocks.
pub fn encode_state(
    snapshot: &NetworkSnapshot,
    previous: &AssignmentPlan,
    l: usize,
    max_rate_bps: f64,
) -> StateFeatures {
    let n = snapshot.num_devices();
    let m = snapshot.num_stations();
    let mut feat = Vec::with_capacity(n * m + l * n);
    for u in 0..n {
        for i in 0..m {
            feat.push((snapshot.uplink[u][i] / max_rate_bps).clamp(0.0, 1.0));
        }
    }
    for u in 0..n {
        let chosen = previous.assignment.get(u).copied();
        for j in 0..l {
            feat.push(f64::from(chosen == Some(j)));
        }
    }
    StateFeatures(feat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::NetworkSnapshot;

    fn snap(uplink: Vec<Vec<f64>>) -> NetworkSnapshot {
        let n = uplink.len();
        let m = uplink.first().map_or(0, Vec::len);
        NetworkSnapshot {
            epoch: 0,
            downlink: uplink.clone(),
            distances: vec![vec![0.0; m]; n],
            association: vec![Some(0); n],
            uplink,
        }
    }

    #[test]
    fn zeros_and_one_hot_blocks() {
        let s = snap(vec![vec![0.0, 0.0], vec![0.0, 0.0]]);
        let plan = AssignmentPlan::new(0, vec![1, 1]);
        let f = encode_state(&s, &plan, 2, 1e6);
        assert_eq!(f.0, vec![0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 1.0]);
        assert_eq!(f.len(), 2 * 2 + 2 * 2);
    }

    #[test]
    fn permuting_devices_permutes_blocks() {
        let s12 = snap(vec![vec![1e5, 2e5], vec![3e5, 4e5]]);
        let s21 = snap(vec![vec![3e5, 4e5], vec![1e5, 2e5]]);
        let p12 = AssignmentPlan::new(0, vec![0, 1]);
        let p21 = AssignmentPlan::new(0, vec![1, 0]);
        let f12 = encode_state(&s12, &p12, 2, 1e6);
        let f21 = encode_state(&s21, &p21, 2, 1e6);
        // device blocks swap: rates [0..2] <-> [2..4], one-hots [4..6] <-> [6..8]
        assert_eq!(&f12.0[0..2], &f21.0[2..4]);
        assert_eq!(&f12.0[2..4], &f21.0[0..2]);
        assert_eq!(&f12.0[4..6], &f21.0[6..8]);
        assert_eq!(&f12.0[6..8], &f21.0[4..6]);
    }

    #[test]
    fn rates_clamped_to_unit_interval() {
        let s = snap(vec![vec![5e6]]);
        let plan = AssignmentPlan::new(0, vec![0]);
        let f = encode_state(&s, &plan, 1, 1e6);
        assert_eq!(f.0[0], 1.0);
    }
}
