//! Scenario presets and the episode/epoch driver.
//!
//! A scenario fixes the selector family and whether the adversary is
//! active; the master choice and every other constant come from the
//! configuration. Repetitions run with derived seeds (master seed plus
//! the repetition index) and fully independent random streams per
//! subsystem, so enabling the adversary never perturbs benign draws.

use serde::{Deserialize, Serialize};

use super::config::{DataSource, ExperimentConfig, SelectorKind};
use crate::adversary::{select_compromised, CompromiseSet};
use crate::data::{flows_to_batch, load_csv, partition, CsvSchema, generate_synthetic, PartitionSpec};
use crate::error::{Error, Result};
use crate::net::{random_pose, snapshot, step_mobility, DevicePose};
use crate::nn::{init_model, ModelWeights};
use crate::protocol::{
    run_epoch, AdversaryHook, AssignmentPlan, DeviceState, EdgeState, EpochMetrics, FlParams,
    MitigationReport, ModelRegistry, WorldState,
};
use crate::rng::{stream, SimRng};
use crate::selector::{
    encode_state, random_selector, reward, select_action, static_selector, update,
    PolicyEnsemble, SelectorConfig, StateFeatures, Transition,
};
use crate::timing::ComputeProfile;
use rand::Rng;

/// Scenario families mirroring the evaluation legends: single-model FL,
/// multi-model FL with the DRL selector, multi-model FL with random
/// selection, each with the adversary on or off, plus the configuration
/// taken verbatim.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scenario {
    FlSingle { attack: bool },
    MmflDrl { attack: bool },
    MmflRnd { attack: bool },
    Custom,
}

impl Scenario {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "fl-single-attack" => Ok(Self::FlSingle { attack: true }),
            "fl-single-noattack" => Ok(Self::FlSingle { attack: false }),
            "mmfl-drl-attack" => Ok(Self::MmflDrl { attack: true }),
            "mmfl-drl-noattack" => Ok(Self::MmflDrl { attack: false }),
            "mmfl-rnd-attack" => Ok(Self::MmflRnd { attack: true }),
            "mmfl-rnd-noattack" => Ok(Self::MmflRnd { attack: false }),
            "custom" => Ok(Self::Custom),
            other => Err(Error::Config(format!(
                "unknown scenario {other}; expected one of fl-single|mmfl-drl|mmfl-rnd with \
                 -attack|-noattack, or custom"
            ))),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Self::FlSingle { attack } => format!("fl-single-{}", suffix(*attack)),
            Self::MmflDrl { attack } => format!("mmfl-drl-{}", suffix(*attack)),
            Self::MmflRnd { attack } => format!("mmfl-rnd-{}", suffix(*attack)),
            Self::Custom => "custom".into(),
        }
    }

    /// Resolve the scenario into a concrete configuration.
    ///
    /// Single-model FL keeps only the master spec, lifts the quota,
    /// disables knowledge transfer (there is nothing to distill), and
    /// pins every device to that model.
    pub fn apply(&self, base: &ExperimentConfig) -> Result<ExperimentConfig> {
        let mut cfg = base.clone();
        match self {
            Self::Custom => {}
            Self::FlSingle { attack } => {
                let master = cfg
                    .master_index()
                    .ok_or_else(|| Error::Config("master_id must name a slave spec".into()))?;
                let spec = cfg.models.slaves[master].clone();
                cfg.models.slaves = vec![spec];
                cfg.fl.t_max = 1.0;
                cfg.fl.knowledge_transfer = false;
                cfg.selector.kind = SelectorKind::Static(0);
                cfg.attack.enabled = *attack;
            }
            Self::MmflDrl { attack } => {
                cfg.selector.kind = SelectorKind::Drl;
                cfg.attack.enabled = *attack;
            }
            Self::MmflRnd { attack } => {
                cfg.selector.kind = SelectorKind::Random;
                cfg.attack.enabled = *attack;
            }
        }
        Ok(cfg)
    }
}

fn suffix(attack: bool) -> &'static str {
    if attack {
        "attack"
    } else {
        "noattack"
    }
}

/// Everything recorded for one repetition.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RepetitionRecord {
    pub seed: u64,
    /// Resolved time weight of the objective.
    pub beta: f64,
    /// Cumulative reward per episode.
    pub episode_rewards: Vec<f64>,
    /// Per-epoch metrics of the final (evaluation) episode.
    pub final_metrics: Vec<EpochMetrics>,
    /// Mitigation reports of the final episode.
    pub final_reports: Vec<MitigationReport>,
    /// The adversary's compromise set per episode.
    pub attack_log: Vec<CompromiseSet>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub scenario: String,
    pub master_seed: u64,
    pub config: ExperimentConfig,
    pub reps: Vec<RepetitionRecord>,
}

impl RunRecord {
    /// Mean across repetitions of a per-episode series.
    pub fn mean_episode_rewards(&self) -> Vec<f64> {
        mean_series(self.reps.iter().map(|r| r.episode_rewards.clone()).collect())
    }

    /// Mean across repetitions of final-episode accuracy per epoch.
    pub fn mean_accuracy(&self) -> Vec<f64> {
        mean_series(
            self.reps
                .iter()
                .map(|r| r.final_metrics.iter().map(|m| m.accuracy).collect())
                .collect(),
        )
    }

    /// Mean across repetitions of the final episode's mean recognition
    /// time per epoch.
    pub fn mean_recognition(&self) -> Vec<f64> {
        mean_series(
            self.reps
                .iter()
                .map(|r| r.final_metrics.iter().map(|m| m.timing.mean_recognition()).collect())
                .collect(),
        )
    }

    pub fn mean_global_loss(&self) -> Vec<f64> {
        mean_series(
            self.reps
                .iter()
                .map(|r| r.final_metrics.iter().map(|m| m.global_loss).collect())
                .collect(),
        )
    }
}

fn mean_series(series: Vec<Vec<f64>>) -> Vec<f64> {
    let Some(len) = series.iter().map(Vec::len).min() else {
        return Vec::new();
    };
    (0..len)
        .map(|i| series.iter().map(|s| s[i]).sum::<f64>() / series.len() as f64)
        .collect()
}

/// Run every repetition of a scenario. The configuration is resolved and
/// validated before anything executes.
pub fn run_scenario(base: &ExperimentConfig, scenario: Scenario) -> Result<RunRecord> {
    let cfg = scenario.apply(base)?;
    cfg.validate()?;
    let mut reps = Vec::with_capacity(cfg.repetitions);
    for rep in 0..cfg.repetitions {
        let seed = cfg.seed + rep as u64;
        reps.push(run_repetition(&cfg, seed)?);
    }
    Ok(RunRecord { scenario: scenario.name(), master_seed: cfg.seed, config: cfg, reps })
}

struct Streams {
    mobility: SimRng,
    selector: SimRng,
    adversary: SimRng,
    crafting: SimRng,
}

fn run_repetition(cfg: &ExperimentConfig, seed: u64) -> Result<RepetitionRecord> {
    let n = cfg.devices;
    let m = cfg.num_stations();
    let l = cfg.num_slaves();
    let registry = ModelRegistry::with_master_in_slaves(cfg.models.slaves.clone(), &cfg.models.master_id)?;
    let master_index = registry.master_index;

    // data
    let mut data_rng = stream(seed, "data");
    let flows = match &cfg.data.source {
        DataSource::Synthetic(p) => generate_synthetic(&mut data_rng, p),
        DataSource::Csv { path, schema_path } => {
            let schema: CsvSchema = serde_json::from_str(&std::fs::read_to_string(schema_path)?)?;
            load_csv(std::path::Path::new(path), &schema)?
        }
    };
    let split = partition(
        flows,
        &PartitionSpec {
            device_flows: vec![cfg.data.device_flows; n],
            edge_sets: m,
            edge_flows: cfg.data.edge_flows,
        },
        &mut data_rng,
    )?;
    let device_batches: Vec<_> = split
        .device_train
        .iter()
        .map(|flows| flows_to_batch(flows))
        .collect::<Result<_>>()?;

    // compute profile
    let mut cpu_rng = stream(seed, "cpu");
    let device_cpu_hz: Vec<f64> = (0..n)
        .map(|_| cpu_rng.random_range(cfg.compute.device_cpu_min_hz..=cfg.compute.device_cpu_max_hz))
        .collect();
    let bits_per_param = cfg.fl.bytes_per_param * 8.0;
    let profile = ComputeProfile {
        bs_cpu_hz: cfg.network.base_stations.iter().map(|b| b.cpu_hz).collect(),
        cloud_cpu_hz: cfg.compute.cloud_cpu_hz,
        device_cpu_hz,
        label_cycles: vec![cfg.compute.label_cycles_per_instance; l],
        master_train_cycles: cfg.compute.master_train_cycles_per_instance,
        agg_cycles_per_param: cfg.compute.agg_cycles_per_param,
        train_cycles_per_param_sample: cfg.compute.train_cycles_per_param_sample,
        inference_cycles: cfg.compute.inference_cycles,
        cloud_rate_pps: cfg.compute.cloud_rate_bps / bits_per_param,
    };

    let mut streams = Streams {
        mobility: stream(seed, "mobility"),
        selector: stream(seed, "selector"),
        adversary: stream(seed, "adversary"),
        crafting: stream(seed, "adversary-craft"),
    };

    let sel = SelectorConfig {
        alpha: cfg.selector.alpha,
        beta: cfg.selector.beta.unwrap_or(1.0),
        t_max: cfg.fl.t_max,
        eps_start: cfg.selector.eps_start,
        eps_end: cfg.selector.eps_end,
        discount: cfg.selector.discount,
        policy_lr: cfg.selector.policy_lr,
        policy_hidden: cfg.selector.policy_hidden,
        max_rate_bps: cfg.selector.max_rate_bps,
    };
    sel.validate()?;
    let mut beta = cfg.selector.beta;

    let input_dim = crate::selector::state_dim(n, m, l);
    let mut ensemble = match cfg.selector.kind {
        SelectorKind::Drl => Some(PolicyEnsemble::new(
            n,
            input_dim,
            cfg.selector.policy_hidden,
            l,
            &mut stream(seed, "policy"),
        )?),
        _ => None,
    };

    let mut episode_rewards = Vec::with_capacity(cfg.episodes);
    let mut final_metrics = Vec::new();
    let mut final_reports = Vec::new();
    let mut attack_log = Vec::with_capacity(cfg.episodes);

    for episode in 0..cfg.episodes {
        // fresh FL session: shared initial replicas, new poses, new
        // compromise set
        let mut init_rng = stream(seed, &format!("init:{episode}"));
        let slave_weights: Vec<ModelWeights> = registry
            .slaves
            .iter()
            .map(|s| init_model(s, &mut init_rng))
            .collect::<Result<_>>()?;
        let master_weights = match master_index {
            Some(mj) => slave_weights[mj].clone(),
            None => init_model(&registry.master, &mut init_rng)?,
        };
        let edges: Vec<EdgeState> = (0..m)
            .map(|bs| {
                EdgeState::new(
                    bs,
                    &registry,
                    slave_weights.clone(),
                    master_weights.clone(),
                    split.edge_unlabeled[bs].clone(),
                )
            })
            .collect::<Result<_>>()?;
        let devices: Vec<DeviceState> = (0..n)
            .map(|u| DeviceState { id: u, train: device_batches[u].clone(), delivered: None })
            .collect();
        let mut world = WorldState {
            registry: registry.clone(),
            devices,
            edges,
            global_master: master_weights,
            test_flows: split.test.clone(),
        };

        let mut pose_rng = stream(seed, &format!("poses:{episode}"));
        let jitter = cfg.network.mobility.speed_jitter;
        let mean = cfg.network.mobility.mean_speed_mps;
        let mut poses: Vec<DevicePose> = (0..n)
            .map(|_| {
                let speed = mean * pose_rng.random_range(1.0 - jitter..=1.0 + jitter);
                random_pose(&cfg.network.grid, &mut pose_rng, speed)
            })
            .collect();

        let compromise = select_compromised(&mut streams.adversary, n, &cfg.attack, episode);
        attack_log.push(compromise.clone());

        let eps = sel.epsilon(episode, cfg.episodes);
        let is_final_episode = episode + 1 == cfg.episodes;
        let mut cumulative = 0.0;
        let mut lr = cfg.fl.lr;
        let mut prev_plan = AssignmentPlan::new(0, vec![0; n]);
        let mut pending: Option<(StateFeatures, AssignmentPlan, f64)> = None;

        for epoch in 0..cfg.fl.epochs {
            step_mobility(&mut poses, &cfg.network.grid, &mut streams.mobility, cfg.network.mobility.dt_s);
            let snap = snapshot(&poses, &cfg.network.base_stations, &cfg.network.channel, epoch);
            let state = encode_state(&snap, &prev_plan, l, sel.max_rate_bps);

            // settle the previous transition now that its successor
            // state is observed
            if let (Some(ens), Some((s, plan, r))) = (ensemble.as_mut(), pending.take()) {
                let t = Transition { state: s, plan, reward: r, next_state: state.clone() };
                update(ens, &t, sel.discount, sel.policy_lr)?;
            }

            let plan = match cfg.selector.kind {
                SelectorKind::Drl => select_action(
                    ensemble.as_ref().expect("drl ensemble"),
                    &state,
                    eps,
                    &mut streams.selector,
                    cfg.fl.t_max,
                    master_index,
                    epoch,
                )?,
                SelectorKind::Random => {
                    random_selector(&mut streams.selector, n, l, cfg.fl.t_max, master_index, epoch)?
                }
                SelectorKind::Static(j) => {
                    static_selector(j, n, l, cfg.fl.t_max, master_index, epoch)?
                }
            };

            let fl_params = FlParams {
                local_iters_k: cfg.fl.local_iters_k,
                lr,
                kt_lr: cfg.fl.kt_lr,
                kt_passes: cfg.fl.kt_passes,
                knowledge_transfer: cfg.fl.knowledge_transfer,
                signature_check: cfg.fl.signature_check,
                t_max: cfg.fl.t_max,
                shared_local_barrier: cfg.fl.shared_local_barrier,
                bits_per_param,
            };
            let hook = if cfg.attack.enabled && !compromise.devices.is_empty() {
                Some(AdversaryHook {
                    set: &compromise,
                    config: &cfg.attack,
                    rng: &mut streams.crafting,
                })
            } else {
                None
            };
            let (metrics, report) = run_epoch(&mut world, &plan, &snap, &profile, &fl_params, hook)?;

            // the first measured epoch calibrates the time weight
            if beta.is_none() {
                let t_ref = metrics.timing.mean_recognition();
                beta = Some(if t_ref > 0.0 { 1.0 / t_ref } else { 1.0 });
            }
            let times: Vec<f64> = metrics
                .timing
                .per_device_recognition
                .iter()
                .map(|t| t.unwrap_or(0.0))
                .collect();
            let r = reward(&metrics.per_device_loss, &times, sel.alpha, beta.unwrap(), true);
            cumulative += r;

            if ensemble.is_some() {
                pending = Some((state, plan.clone(), r));
            }
            if is_final_episode {
                final_metrics.push(metrics);
                final_reports.push(report);
            }
            prev_plan = plan;
            lr *= cfg.fl.lr_decay;
        }

        // close the episode's last transition against one more observed
        // network state
        if let (Some(ens), Some((s, plan, r))) = (ensemble.as_mut(), pending.take()) {
            step_mobility(&mut poses, &cfg.network.grid, &mut streams.mobility, cfg.network.mobility.dt_s);
            let snap = snapshot(&poses, &cfg.network.base_stations, &cfg.network.channel, cfg.fl.epochs);
            let next = encode_state(&snap, &plan, l, sel.max_rate_bps);
            let t = Transition { state: s, plan, reward: r, next_state: next };
            update(ens, &t, sel.discount, sel.policy_lr)?;
        }

        episode_rewards.push(cumulative);
    }

    Ok(RepetitionRecord {
        seed,
        beta: beta.unwrap_or(1.0),
        episode_rewards,
        final_metrics,
        final_reports,
        attack_log,
    })
}
