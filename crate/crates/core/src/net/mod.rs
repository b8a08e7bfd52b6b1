//! Manhattan-grid mobility, base-station association, and the path-loss
//! channel producing the per-epoch rate matrix.

mod channel;
mod mobility;
mod snapshot;

pub use channel::{channel_gain, db_to_linear, tx_rate, MIN_DISTANCE_M};
pub use mobility::{random_pose, step_mobility};
pub use snapshot::{snapshot, ASSOCIATION_TIE_EPS};

use serde::{Deserialize, Serialize};

/// Square road grid: `cells_per_side` cells of `cell_width` metres each;
/// the grid lines are bidirectional roads.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GridMap {
    pub cells_per_side: usize,
    pub cell_width: f64,
}

impl GridMap {
    /// Side length of the covered area in metres.
    pub fn extent(&self) -> f64 {
        self.cells_per_side as f64 * self.cell_width
    }

    /// Whether (x, y) lies on a road (a grid line) within bounds.
    pub fn on_road(&self, x: f64, y: f64, eps: f64) -> bool {
        let e = self.extent();
        if !(-eps..=e + eps).contains(&x) || !(-eps..=e + eps).contains(&y) {
            return false;
        }
        let near_line = |v: f64| (v / self.cell_width - (v / self.cell_width).round()).abs() * self.cell_width <= eps;
        near_line(x) || near_line(y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Heading {
    North,
    South,
    East,
    West,
}

impl Heading {
    pub fn unit(self) -> (f64, f64) {
        match self {
            Heading::North => (0.0, 1.0),
            Heading::South => (0.0, -1.0),
            Heading::East => (1.0, 0.0),
            Heading::West => (-1.0, 0.0),
        }
    }

    pub fn right(self) -> Heading {
        match self {
            Heading::North => Heading::East,
            Heading::East => Heading::South,
            Heading::South => Heading::West,
            Heading::West => Heading::North,
        }
    }

    pub fn left(self) -> Heading {
        self.right().right().right()
    }
}

/// A vehicle-mounted device: position on a road, axis-aligned heading,
/// constant speed.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DevicePose {
    pub x: f64,
    pub y: f64,
    pub heading: Heading,
    pub speed: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BaseStation {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    pub bandwidth_hz: f64,
    pub coverage_radius_m: f64,
    pub tx_power_dbm: f64,
    pub cpu_hz: f64,
}

/// Path-loss and power parameters. The exponent is named `path_loss_exp`
/// rather than alpha to avoid clashing with the objective weight.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ChannelParams {
    pub path_loss_coeff: f64,
    pub path_loss_exp: f64,
    /// Total background noise power in dBm.
    pub noise_dbm: f64,
    pub device_tx_power_dbm: f64,
}

/// Rates and association for one epoch. `uplink[u][i]` is the rate from
/// device u to station i (0 outside coverage); `downlink` uses the same
/// gain with the station's transmit power.
#[derive(Debug, Clone)]
pub struct NetworkSnapshot {
    pub epoch: usize,
    pub uplink: Vec<Vec<f64>>,
    pub downlink: Vec<Vec<f64>>,
    pub distances: Vec<Vec<f64>>,
    pub association: Vec<Option<usize>>,
}

impl NetworkSnapshot {
    pub fn num_devices(&self) -> usize {
        self.uplink.len()
    }

    pub fn num_stations(&self) -> usize {
        self.uplink.first().map_or(0, Vec::len)
    }

    /// CSV rows (epoch, device, bs, distance, uplink_rate) for inspection.
    pub fn to_csv_rows(&self) -> Vec<String> {
        let mut rows = Vec::new();
        for (u, rates) in self.uplink.iter().enumerate() {
            for (i, r) in rates.iter().enumerate() {
                rows.push(format!(
                    "{},{},{},{},{}",
                    self.epoch, u, i, self.distances[u][i], r
                ));
            }
        }
        rows
    }
}
