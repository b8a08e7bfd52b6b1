//! Per-epoch rate matrix and association construction.

use super::{channel_gain, db_to_linear, tx_rate, BaseStation, ChannelParams, DevicePose, NetworkSnapshot};

/// Distances closer than this are treated as an association tie and
/// resolved in favour of the lower station id.
pub const ASSOCIATION_TIE_EPS: f64 = 1e-9;

/// Build the epoch snapshot: each device associates to the nearest
/// in-range station (ties by lower id); rates are zero exactly when the
/// device is outside a station's coverage radius.
pub fn snapshot(
    poses: &[DevicePose],
    stations: &[BaseStation],
    params: &ChannelParams,
    epoch: usize,
) -> NetworkSnapshot {
    let noise_mw = db_to_linear(params.noise_dbm);
    let device_mw = db_to_linear(params.device_tx_power_dbm);

    let n = poses.len();
    let m = stations.len();
    let mut uplink = vec![vec![0.0; m]; n];
    let mut downlink = vec![vec![0.0; m]; n];
    let mut distances = vec![vec![0.0; m]; n];
    let mut association = vec![None; n];

    for (u, pose) in poses.iter().enumerate() {
        let mut best: Option<(usize, f64)> = None;
        for (i, bs) in stations.iter().enumerate() {
            let d = ((pose.x - bs.x).powi(2) + (pose.y - bs.y).powi(2)).sqrt();
            distances[u][i] = d;
            if d > bs.coverage_radius_m {
                continue;
            }
            let gain = channel_gain(d, params);
            uplink[u][i] = tx_rate(bs.bandwidth_hz, device_mw, gain, noise_mw);
            downlink[u][i] = tx_rate(bs.bandwidth_hz, db_to_linear(bs.tx_power_dbm), gain, noise_mw);
            match best {
                None => best = Some((i, d)),
                Some((_, bd)) if d < bd - ASSOCIATION_TIE_EPS => best = Some((i, d)),
                Some(_) => {}
            }
        }
        association[u] = best.map(|(i, _)| i);
    }

    NetworkSnapshot { epoch, uplink, downlink, distances, association }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::{random_pose, GridMap};
    use crate::rng::stream;

    fn stations() -> Vec<BaseStation> {
        vec![
            BaseStation { id: 0, x: 50.0, y: 50.0, bandwidth_hz: 28e6, coverage_radius_m: 300.0, tx_power_dbm: 34.0, cpu_hz: 3.2e9 },
            BaseStation { id: 1, x: 350.0, y: 350.0, bandwidth_hz: 30e6, coverage_radius_m: 300.0, tx_power_dbm: 34.0, cpu_hz: 2.6e9 },
        ]
    }

    fn params() -> ChannelParams {
        ChannelParams { path_loss_coeff: 1.0, path_loss_exp: 5.0, noise_dbm: -174.0, device_tx_power_dbm: 23.0 }
    }

    fn pose(x: f64, y: f64) -> DevicePose {
        DevicePose { x, y, heading: crate::net::Heading::East, speed: 0.0 }
    }

    #[test]
    fn device_at_station_gets_maximal_gain_rate() {
        let s = stations();
        let p = params();
        let snap = snapshot(&[pose(50.0, 50.0), pose(150.0, 50.0)], &s, &p, 0);
        assert_eq!(snap.association[0], Some(0));
        // clamped distance 1 m gives the maximal gain for that station
        assert!(snap.uplink[0][0] > snap.uplink[1][0]);
    }

    #[test]
    fn equidistant_tie_prefers_lower_id() {
        let s = stations();
        let p = params();
        let snap = snapshot(&[pose(200.0, 200.0)], &s, &p, 0);
        assert!((snap.distances[0][0] - snap.distances[0][1]).abs() < 1e-9);
        assert_eq!(snap.association[0], Some(0));
    }

    #[test]
    fn rate_zero_iff_out_of_coverage() {
        let s = stations();
        let p = params();
        // the grid corner (400, 0) is more than 300 m from both stations
        let snap = snapshot(&[pose(400.0, 0.0), pose(100.0, 100.0)], &s, &p, 3);
        assert_eq!(snap.association[0], None);
        assert_eq!(snap.uplink[0][0], 0.0);
        assert_eq!(snap.uplink[0][1], 0.0);
        assert_eq!(snap.association[1], Some(0));
        for (u, rates) in snap.uplink.iter().enumerate() {
            for (i, &r) in rates.iter().enumerate() {
                let out = snap.distances[u][i] > s[i].coverage_radius_m;
                assert_eq!(r == 0.0, out);
                assert!(r >= 0.0);
            }
        }
    }

    #[test]
    fn seeded_devices_on_grid_are_covered() {
        let g = GridMap { cells_per_side: 4, cell_width: 100.0 };
        let mut rng = stream(77, "cover");
        let poses: Vec<DevicePose> = (0..10).map(|_| random_pose(&g, &mut rng, 12.5)).collect();
        let snap = snapshot(&poses, &stations(), &params(), 0);
        for (u, a) in snap.association.iter().enumerate() {
            assert!(a.is_some(), "device {u} at ({}, {}) uncovered", poses[u].x, poses[u].y);
        }
    }

    #[test]
    fn downlink_exceeds_uplink_with_higher_station_power() {
        let snap = snapshot(&[pose(120.0, 100.0)], &stations(), &params(), 0);
        assert!(snap.downlink[0][0] > snap.uplink[0][0]);
    }
}
