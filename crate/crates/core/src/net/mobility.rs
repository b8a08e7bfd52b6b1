//! Manhattan mobility: vehicles advance along grid roads and turn at
//! junctions with probability 0.5 straight, 0.25 right, 0.25 left,
//! renormalized over the headings that stay inside the grid.

use rand::Rng;

use super::{DevicePose, GridMap, Heading};
use crate::rng::SimRng;

const JUNCTION_EPS: f64 = 1e-9;

fn is_multiple(v: f64, w: f64) -> bool {
    (v - (v / w).round() * w).abs() <= JUNCTION_EPS
}

fn at_junction(pose: &DevicePose, grid: &GridMap) -> bool {
    is_multiple(pose.x, grid.cell_width) && is_multiple(pose.y, grid.cell_width)
}

fn legal(heading: Heading, jx: f64, jy: f64, extent: f64) -> bool {
    match heading {
        Heading::North => jy < extent - JUNCTION_EPS,
        Heading::South => jy > JUNCTION_EPS,
        Heading::East => jx < extent - JUNCTION_EPS,
        Heading::West => jx > JUNCTION_EPS,
    }
}

/// Sample the next heading at a junction. Candidates are straight (0.5),
/// right (0.25), left (0.25); illegal ones are dropped and the rest
/// renormalized.
fn turn(heading: Heading, jx: f64, jy: f64, extent: f64, rng: &mut SimRng) -> Heading {
    let candidates = [
        (heading, 0.5),
        (heading.right(), 0.25),
        (heading.left(), 0.25),
    ];
    let legal_set: Vec<(Heading, f64)> = candidates
        .iter()
        .copied()
        .filter(|(h, _)| legal(*h, jx, jy, extent))
        .collect();
    if legal_set.is_empty() {
        // unreachable on a grid with at least one cell; reverse as a guard
        return heading.left().left();
    }
    let total: f64 = legal_set.iter().map(|(_, p)| p).sum();
    let mut draw = rng.random_range(0.0..total);
    for (h, p) in &legal_set {
        if draw < *p {
            return *h;
        }
        draw -= p;
    }
    legal_set.last().unwrap().0
}

/// Distance from the pose to the next junction along its heading.
fn distance_to_junction(pose: &DevicePose, grid: &GridMap) -> f64 {
    let w = grid.cell_width;
    let along = match pose.heading {
        Heading::North | Heading::South => pose.y,
        Heading::East | Heading::West => pose.x,
    };
    let cell = along / w;
    match pose.heading {
        Heading::North | Heading::East => {
            let next = (cell + JUNCTION_EPS).floor() + 1.0;
            next * w - along
        }
        Heading::South | Heading::West => {
            let prev = (cell - JUNCTION_EPS).ceil() - 1.0;
            along - prev * w
        }
    }
}

fn advance(pose: &mut DevicePose, dist: f64) {
    let (dx, dy) = pose.heading.unit();
    pose.x += dx * dist;
    pose.y += dy * dist;
}

/// Snap the along-heading coordinate exactly onto the junction just
/// reached, keeping positions on grid lines bit-for-bit.
fn snap_to_junction(pose: &mut DevicePose, grid: &GridMap) {
    let w = grid.cell_width;
    match pose.heading {
        Heading::North | Heading::South => pose.y = (pose.y / w).round() * w,
        Heading::East | Heading::West => pose.x = (pose.x / w).round() * w,
    }
}

/// Advance every pose by `speed * dt` metres, turning at each junction
/// crossed. A vehicle that stops exactly on a junction decides its turn
/// at the start of its next step.
pub fn step_mobility(poses: &mut [DevicePose], grid: &GridMap, rng: &mut SimRng, dt: f64) {
    let extent = grid.extent();
    for pose in poses.iter_mut() {
        let mut remaining = pose.speed * dt;
        if remaining <= 0.0 {
            continue;
        }
        if at_junction(pose, grid) {
            pose.heading = turn(pose.heading, pose.x, pose.y, extent, rng);
        }
        while remaining > 0.0 {
            let to_junction = distance_to_junction(pose, grid);
            if to_junction > remaining {
                advance(pose, remaining);
                break;
            }
            advance(pose, to_junction);
            snap_to_junction(pose, grid);
            remaining -= to_junction;
            if remaining > 0.0 {
                pose.heading = turn(pose.heading, pose.x, pose.y, extent, rng);
            }
        }
    }
}

/// Uniform random pose on a road with a random along-road heading.
pub fn random_pose(grid: &GridMap, rng: &mut SimRng, speed: f64) -> DevicePose {
    let extent = grid.extent();
    let line = rng.random_range(0..=grid.cells_per_side) as f64 * grid.cell_width;
    let offset = rng.random_range(0.0..extent);
    let horizontal: bool = rng.random();
    let flip: bool = rng.random();
    if horizontal {
        let heading = if flip { Heading::East } else { Heading::West };
        DevicePose { x: offset, y: line, heading, speed }
    } else {
        let heading = if flip { Heading::North } else { Heading::South };
        DevicePose { x: line, y: offset, heading, speed }
    }
}
