//! One synchronous FL epoch: download of the planned weights, local
//! training, adversary injection, mitigation, per-station partial
//! aggregation, knowledge transfer, cloud aggregation, and broadcast,
//! with the full timing breakdown and epoch metrics.

use serde::{Deserialize, Serialize};

use super::{
    knowledge_transfer, mitigate, partial_aggregate, validate_plan, AssignmentPlan, EdgeState,
    MitigationReport, ModelRegistry, Upload,
};
use crate::adversary::{inject, AttackConfig, CompromiseSet};
use crate::data::{evaluate_accuracy, Flow};
use crate::error::{Error, Result};
use crate::net::NetworkSnapshot;
use crate::nn::{loss, train_local, LabeledBatch, ModelWeights};
use crate::protocol::cloud_aggregate;
use crate::rng::SimRng;
use crate::timing::{
    t_downlink, t_global_agg, t_knowledge, t_local, t_partial_agg, t_recognition, ComputeProfile,
    EpochTiming,
};

/// Per-epoch protocol parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlParams {
    /// Local GD iterations per epoch (K).
    pub local_iters_k: usize,
    /// Device learning rate for this epoch.
    pub lr: f64,
    pub kt_lr: f64,
    /// GD passes per slave during knowledge transfer.
    pub kt_passes: usize,
    pub knowledge_transfer: bool,
    /// Compare full shape maps during mitigation, not just counts.
    pub signature_check: bool,
    pub t_max: f64,
    /// Apply the epoch-wide max over local training times (synchronous
    /// barrier); otherwise each device waits only on itself.
    pub shared_local_barrier: bool,
    /// Bits transferred per model parameter (rate conversion).
    pub bits_per_param: f64,
}

impl Default for FlParams {
    fn default() -> Self {
        Self {
            local_iters_k: 1,
            lr: 0.07,
            kt_lr: 0.07,
            kt_passes: 1,
            knowledge_transfer: true,
            signature_check: false,
            t_max: 0.6,
            shared_local_barrier: true,
            bits_per_param: 32.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DeviceState {
    pub id: usize,
    pub train: LabeledBatch,
    /// Weights delivered by the most recent broadcast that reached the
    /// device; stale for devices out of coverage.
    pub delivered: Option<ModelWeights>,
}

/// Everything the protocol mutates across epochs.
#[derive(Debug, Clone)]
pub struct WorldState {
    pub registry: ModelRegistry,
    pub devices: Vec<DeviceState>,
    pub edges: Vec<EdgeState>,
    pub global_master: ModelWeights,
    pub test_flows: Vec<Flow>,
}

/// The adversary's hook into the upload path.
pub struct AdversaryHook<'a> {
    pub set: &'a CompromiseSet,
    pub config: &'a AttackConfig,
    pub rng: &'a mut SimRng,
}

/// Everything measured in one epoch.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    /// Mean loss of the new global master over all devices' local data.
    pub global_loss: f64,
    /// Per-device loss of the post-broadcast model on local data.
    pub per_device_loss: Vec<f64>,
    /// Detection accuracy of the new global master on the test flows.
    pub accuracy: f64,
    pub timing: EpochTiming,
    pub excluded: usize,
    pub accepted: usize,
    pub participants: Vec<bool>,
}

/// Execute one epoch under `plan`, mutating the world. Devices out of
/// coverage neither upload nor download and keep their stale weights.
pub fn run_epoch(
    world: &mut WorldState,
    plan: &AssignmentPlan,
    snapshot: &NetworkSnapshot,
    profile: &ComputeProfile,
    fl: &FlParams,
    adversary: Option<AdversaryHook<'_>>,
) -> Result<(EpochMetrics, MitigationReport)> {
    let n = world.devices.len();
    let l = world.registry.num_slaves();
    let violations = validate_plan(plan, n, l, fl.t_max, world.registry.master_index);
    if !violations.is_empty() {
        let s: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return Err(Error::Protocol(format!("infeasible plan: {}", s.join("; "))));
    }

    let pps = |bps: f64| bps / fl.bits_per_param;
    let participants: Vec<bool> = (0..n).map(|u| snapshot.association[u].is_some()).collect();

    // steps 1-2: download the planned weights and train locally
    let mut uploads: Vec<Upload> = Vec::new();
    let mut planned_params = vec![0usize; n];
    for u in 0..n {
        let slot = plan.assignment[u];
        planned_params[u] = world.registry.slaves[slot].param_count();
        if !participants[u] {
            continue;
        }
        let bs = snapshot.association[u].unwrap();
        let start = if world.registry.is_master_slot(slot) {
            world.global_master.clone()
        } else {
            world.edges[bs].slaves[slot].clone()
        };
        let device = &world.devices[u];
        let declared = if device.train.is_empty() {
            start
        } else {
            train_local(&start, &device.train, fl.lr, fl.local_iters_k)?
        };
        uploads.push(Upload { device_id: u, declared, batch_size: device.train.len() });
    }

    // adversary replaces compromised devices' uploads
    if let Some(hook) = adversary {
        inject(&mut uploads, hook.set, &world.global_master, hook.config, hook.rng)?;
    }

    // step 3: structural mitigation
    let all_uploads: Vec<(usize, usize)> =
        uploads.iter().map(|up| (up.device_id, up.declared.param_count())).collect();
    let (accepted, report) = mitigate(uploads, plan, &world.registry, fl.signature_check);

    // step 4: per-station partial aggregation over accepted groups
    let m = world.edges.len();
    let mut per_bs_counts = vec![vec![0usize; l]; m];
    let mut groups: Vec<Vec<Vec<&Upload>>> = vec![vec![Vec::new(); l]; m];
    for up in &accepted {
        let bs = snapshot.association[up.device_id].expect("accepted implies associated");
        let slot = plan.assignment[up.device_id];
        groups[bs][slot].push(up);
        per_bs_counts[bs][slot] += 1;
    }
    let mut new_slaves: Vec<Vec<Option<ModelWeights>>> = vec![vec![None; l]; m];
    for bs in 0..m {
        for slot in 0..l {
            if !groups[bs][slot].is_empty() {
                new_slaves[bs][slot] =
                    Some(partial_aggregate(&groups[bs][slot], &world.registry.slaves[slot])?);
            }
        }
    }
    for bs in 0..m {
        for slot in 0..l {
            if let Some(w) = new_slaves[bs][slot].take() {
                world.edges[bs].slaves[slot] = w;
            }
        }
    }

    // master uploads seed the station master before knowledge transfer
    if let Some(mj) = world.registry.master_index {
        for bs in 0..m {
            world.edges[bs].master = world.edges[bs].slaves[mj].clone();
        }
    }

    // step 5: knowledge transfer at every station
    if fl.knowledge_transfer {
        for bs in 0..m {
            world.edges[bs].master = knowledge_transfer(&world.edges[bs], fl.kt_lr, fl.kt_passes)?;
        }
    }

    // step 6: cloud aggregation and master redistribution
    let masters: Vec<ModelWeights> = world.edges.iter().map(|e| e.master.clone()).collect();
    let new_master = cloud_aggregate(&masters)?;
    world.global_master = new_master.clone();
    for edge in &mut world.edges {
        edge.master = new_master.clone();
        if let Some(mj) = world.registry.master_index {
            edge.slaves[mj] = new_master.clone();
        }
    }

    // step 7: broadcast the planned structure back to each device
    for u in 0..n {
        if !participants[u] {
            continue;
        }
        let bs = snapshot.association[u].unwrap();
        let slot = plan.assignment[u];
        let delivered = if world.registry.is_master_slot(slot) {
            world.global_master.clone()
        } else {
            world.edges[bs].slaves[slot].clone()
        };
        world.devices[u].delivered = Some(delivered);
    }

    // timing breakdown
    let mut per_bs_knowledge = vec![0.0; m];
    let mut per_bs_aggregation = vec![0.0; m];
    for bs in 0..m {
        if fl.knowledge_transfer {
            per_bs_knowledge[bs] = t_knowledge(
                world.edges[bs].edge_data.len(),
                &profile.label_cycles,
                profile.master_train_cycles,
                profile.bs_cpu_hz[bs],
            );
        }
        let transfers: Vec<(usize, f64)> = all_uploads
            .iter()
            .filter(|(dev, _)| snapshot.association[*dev] == Some(bs))
            .map(|(dev, size)| (*size, pps(snapshot.uplink[*dev][bs])))
            .collect();
        let slave_groups: Vec<(usize, usize)> = (0..l)
            .map(|slot| (per_bs_counts[bs][slot], world.registry.slaves[slot].param_count()))
            .collect();
        per_bs_aggregation[bs] = t_partial_agg(
            &transfers,
            &slave_groups,
            profile.agg_cycles_per_param,
            profile.bs_cpu_hz[bs],
        )?;
    }
    let master_size = world.registry.master.param_count();
    let per_bs: Vec<(f64, f64)> = per_bs_aggregation
        .iter()
        .zip(&per_bs_knowledge)
        .map(|(&a, &k)| (a, k))
        .collect();
    let global_aggregation = t_global_agg(
        &per_bs,
        master_size,
        profile.cloud_rate_pps,
        profile.agg_cycles_per_param,
        profile.cloud_cpu_hz,
    );

    let mut per_device_downlink = vec![None; n];
    let mut per_device_local = vec![None; n];
    for u in 0..n {
        if !participants[u] {
            continue;
        }
        let bs = snapshot.association[u].unwrap();
        per_device_downlink[u] = Some(t_downlink(
            master_size,
            planned_params[u],
            profile.cloud_rate_pps,
            pps(snapshot.downlink[u][bs]),
        )?);
        per_device_local[u] = Some(t_local(
            world.devices[u].train.len(),
            planned_params[u],
            profile.train_cycles_per_param_sample,
            profile.device_cpu_hz[u],
        ));
    }
    let barrier = per_device_local.iter().flatten().fold(0.0f64, |a, &b| a.max(b));
    let mut per_device_recognition = vec![None; n];
    for u in 0..n {
        let (Some(down), Some(local)) = (per_device_downlink[u], per_device_local[u]) else {
            continue;
        };
        let local_term = if fl.shared_local_barrier { barrier } else { local };
        per_device_recognition[u] = Some(t_recognition(
            fl.local_iters_k,
            local_term,
            global_aggregation,
            down,
            profile.inference_cycles,
            profile.device_cpu_hz[u],
        ));
    }
    let timing = EpochTiming {
        per_bs_knowledge,
        per_bs_aggregation,
        global_aggregation,
        per_device_downlink,
        per_device_local,
        per_device_recognition,
    };

    // losses and accuracy on the new global master
    let mut global_loss = 0.0;
    let mut counted = 0usize;
    let mut per_device_loss = vec![0.0; n];
    for (u, device) in world.devices.iter().enumerate() {
        if device.train.is_empty() {
            continue;
        }
        global_loss += loss(&world.global_master, &device.train)?;
        counted += 1;
        let local_model = device.delivered.as_ref().unwrap_or(&world.global_master);
        per_device_loss[u] = loss(local_model, &device.train)?;
    }
    if counted > 0 {
        global_loss /= counted as f64;
    }
    let accuracy = if world.test_flows.is_empty() {
        f64::NAN
    } else {
        evaluate_accuracy(&world.global_master, &world.test_flows)?
    };

    let metrics = EpochMetrics {
        epoch: plan.epoch,
        global_loss,
        per_device_loss,
        accuracy,
        timing,
        excluded: report.excluded_count(),
        accepted: report.accepted_count(),
        participants,
    };
    Ok((metrics, report))
}
