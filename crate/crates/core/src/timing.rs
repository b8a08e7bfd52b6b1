//! Closed-form epoch timing: knowledge transfer, partial and global
//! aggregation, downlink, local training, and end-to-end recognition
//! time. Everything is plain arithmetic over one compute profile; rates
//! are expressed in parameters per second (callers convert from bits per
//! second with a bytes-per-parameter constant).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// CPU and link constants for one deployment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComputeProfile {
    /// Per-station CPU frequency in Hz.
    pub bs_cpu_hz: Vec<f64>,
    pub cloud_cpu_hz: f64,
    /// Per-device CPU frequency in Hz.
    pub device_cpu_hz: Vec<f64>,
    /// Cycles to label one edge instance with slave j.
    pub label_cycles: Vec<f64>,
    /// Cycles to train the master replica on one labeled instance.
    pub master_train_cycles: f64,
    /// Cycles to aggregate one parameter.
    pub agg_cycles_per_param: f64,
    /// Cycles to train one sample per model parameter; training cost is
    /// this constant times the selected model's parameter count.
    pub train_cycles_per_param_sample: f64,
    /// Cycles for one recognition pass.
    pub inference_cycles: f64,
    /// Cloud link rate in parameters per second (both directions).
    pub cloud_rate_pps: f64,
}

/// Per-epoch timing breakdown. Device entries are `None` for devices out
/// of coverage that epoch.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct EpochTiming {
    pub per_bs_knowledge: Vec<f64>,
    pub per_bs_aggregation: Vec<f64>,
    pub global_aggregation: f64,
    pub per_device_downlink: Vec<Option<f64>>,
    pub per_device_local: Vec<Option<f64>>,
    pub per_device_recognition: Vec<Option<f64>>,
}

impl EpochTiming {
    pub fn mean_recognition(&self) -> f64 {
        let xs: Vec<f64> = self.per_device_recognition.iter().flatten().copied().collect();
        if xs.is_empty() {
            0.0
        } else {
            xs.iter().sum::<f64>() / xs.len() as f64
        }
    }

    pub fn max_recognition(&self) -> f64 {
        self.per_device_recognition
            .iter()
            .flatten()
            .fold(0.0f64, |a, &b| a.max(b))
    }
}

/// Knowledge-transfer time at one station: every slave labels the edge
/// set and the master trains on each labeled copy.
pub fn t_knowledge(edge_size: usize, label_cycles: &[f64], master_train_cycles: f64, bs_cpu_hz: f64) -> f64 {
    let d = edge_size as f64;
    label_cycles
        .iter()
        .map(|f_ds| d * f_ds / bs_cpu_hz + d * master_train_cycles / bs_cpu_hz)
        .sum()
}

/// Partial-aggregation time at one station: slowest upload transfer plus
/// the per-slave aggregation compute. `uploads` pairs each counted
/// upload's parameter count with its uplink rate (params/s);
/// `slave_groups` pairs each slave's accepted-device count with its
/// parameter count.
pub fn t_partial_agg(
    uploads: &[(usize, f64)],
    slave_groups: &[(usize, usize)],
    agg_cycles_per_param: f64,
    bs_cpu_hz: f64,
) -> Result<f64> {
    let mut transfer: f64 = 0.0;
    for (idx, &(size, rate)) in uploads.iter().enumerate() {
        if rate <= 0.0 {
            return Err(Error::ZeroRate { device: idx });
        }
        transfer = transfer.max(size as f64 / rate);
    }
    let compute: f64 = slave_groups
        .iter()
        .map(|&(count, size)| count as f64 * size as f64 * agg_cycles_per_param / bs_cpu_hz)
        .sum();
    Ok(transfer + compute)
}

/// Global aggregation time: slowest station pipeline (partial
/// aggregation, knowledge transfer, master upload to the cloud) plus the
/// cloud-side averaging of all master replicas.
pub fn t_global_agg(
    per_bs: &[(f64, f64)],
    master_params: usize,
    cloud_rate_pps: f64,
    agg_cycles_per_param: f64,
    cloud_cpu_hz: f64,
) -> f64 {
    let m = per_bs.len() as f64;
    let w = master_params as f64;
    let slowest = per_bs
        .iter()
        .map(|&(t_ag, t_knw)| t_ag + t_knw + w / cloud_rate_pps)
        .fold(0.0f64, f64::max);
    slowest + m * w * agg_cycles_per_param / cloud_cpu_hz
}

/// Downlink time: master parameters from the cloud plus the planned
/// model's parameters from the serving station.
pub fn t_downlink(master_params: usize, planned_params: usize, cloud_rate_pps: f64, downlink_pps: f64) -> Result<f64> {
    if downlink_pps <= 0.0 {
        return Err(Error::ZeroRate { device: 0 });
    }
    Ok(master_params as f64 / cloud_rate_pps + planned_params as f64 / downlink_pps)
}

/// Local training time for one iteration over the device's batch.
pub fn t_local(batch_size: usize, planned_params: usize, train_cycles_per_param_sample: f64, device_cpu_hz: f64) -> f64 {
    batch_size as f64 * (train_cycles_per_param_sample * planned_params as f64) / device_cpu_hz
}

/// End-to-end recognition time for one device. `local_barrier` is
/// either the epoch-wide maximum of the per-device local training times
/// (synchronous barrier) or the device's own, depending on configuration.
pub fn t_recognition(
    k: usize,
    local_barrier: f64,
    t_ag: f64,
    t_down: f64,
    inference_cycles: f64,
    device_cpu_hz: f64,
) -> f64 {
    k as f64 * local_barrier + t_ag + t_down + inference_cycles / device_cpu_hz
}
