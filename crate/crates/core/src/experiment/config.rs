//! Experiment configuration: one JSON document resolving every constant
//! of a run. Validation is total; nothing executes on an invalid config.

use serde::{Deserialize, Serialize};

use crate::adversary::AttackConfig;
use crate::data::SyntheticParams;
use crate::error::{Error, Result};
use crate::net::{BaseStation, ChannelParams, GridMap};
use crate::nn::ModelSpec;
use crate::protocol::master_quota;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MobilityConfig {
    pub mean_speed_mps: f64,
    /// Per-device speed drawn uniformly from mean * (1 +/- jitter).
    pub speed_jitter: f64,
    /// Simulated mobility seconds per FL epoch.
    pub dt_s: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub grid: GridMap,
    pub base_stations: Vec<BaseStation>,
    pub channel: ChannelParams,
    pub mobility: MobilityConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelsConfig {
    pub slaves: Vec<ModelSpec>,
    pub master_id: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlConfig {
    pub epochs: usize,
    pub local_iters_k: usize,
    pub lr: f64,
    /// Multiplicative learning-rate decay per epoch.
    pub lr_decay: f64,
    pub t_max: f64,
    pub kt_lr: f64,
    pub kt_passes: usize,
    pub knowledge_transfer: bool,
    pub signature_check: bool,
    pub shared_local_barrier: bool,
    pub bytes_per_param: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectorKind {
    Drl,
    Random,
    Static(usize),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelectorSection {
    pub kind: SelectorKind,
    pub alpha: f64,
    /// None resolves to 1 / (first-epoch mean recognition time).
    pub beta: Option<f64>,
    pub eps_start: f64,
    pub eps_end: f64,
    pub discount: f64,
    pub policy_lr: f64,
    pub policy_hidden: usize,
    pub max_rate_bps: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DataSource {
    Synthetic(SyntheticParams),
    Csv { path: String, schema_path: String },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DataConfig {
    pub source: DataSource,
    /// Training flows per device.
    pub device_flows: usize,
    /// Unlabeled flows per station edge set.
    pub edge_flows: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComputeConfig {
    pub device_cpu_min_hz: f64,
    pub device_cpu_max_hz: f64,
    pub cloud_cpu_hz: f64,
    pub cloud_rate_bps: f64,
    pub train_cycles_per_param_sample: f64,
    pub label_cycles_per_instance: f64,
    pub master_train_cycles_per_instance: f64,
    pub agg_cycles_per_param: f64,
    pub inference_cycles: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub devices: usize,
    pub seed: u64,
    pub episodes: usize,
    pub repetitions: usize,
    pub network: NetworkConfig,
    pub models: ModelsConfig,
    pub fl: FlConfig,
    pub attack: AttackConfig,
    pub selector: SelectorSection,
    pub data: DataConfig,
    pub compute: ComputeConfig,
}

impl ExperimentConfig {
    /// Radio and protocol constants of the evaluation scenario (two
    /// stations on a 4x4 grid of 100 m cells, 45 km/h vehicles,
    /// T_max 0.6, a 3-to-5 device adversary) at desk-scale data sizes.
    pub fn desk_default() -> Self {
        let features = 12;
        Self {
            devices: 10,
            seed: 42,
            episodes: 30,
            repetitions: 5,
            network: NetworkConfig {
                grid: GridMap { cells_per_side: 4, cell_width: 100.0 },
                base_stations: vec![
                    BaseStation {
                        id: 0,
                        x: 50.0,
                        y: 50.0,
                        bandwidth_hz: 28e6,
                        coverage_radius_m: 300.0,
                        tx_power_dbm: 34.0,
                        cpu_hz: 3.2e9,
                    },
                    BaseStation {
                        id: 1,
                        x: 350.0,
                        y: 350.0,
                        bandwidth_hz: 30e6,
                        coverage_radius_m: 300.0,
                        tx_power_dbm: 34.0,
                        cpu_hz: 2.6e9,
                    },
                ],
                channel: ChannelParams {
                    path_loss_coeff: 1.0,
                    path_loss_exp: 5.0,
                    noise_dbm: -174.0,
                    device_tx_power_dbm: 23.0,
                },
                mobility: MobilityConfig { mean_speed_mps: 12.5, speed_jitter: 0.2, dt_s: 1.0 },
            },
            models: ModelsConfig {
                slaves: vec![ModelSpec::gru("gru-small", features, 6), ModelSpec::gru("gru-large", features, 8)],
                master_id: "gru-large".into(),
            },
            fl: FlConfig {
                epochs: 8,
                local_iters_k: 1,
                lr: 0.07,
                lr_decay: 1.0,
                t_max: 0.6,
                kt_lr: 0.07,
                kt_passes: 1,
                knowledge_transfer: true,
                signature_check: false,
                shared_local_barrier: true,
                bytes_per_param: 4.0,
            },
            attack: AttackConfig::default(),
            selector: SelectorSection {
                kind: SelectorKind::Drl,
                alpha: 1.0,
                beta: None,
                eps_start: 1.0,
                eps_end: 0.02,
                discount: 0.1,
                policy_lr: 0.05,
                policy_hidden: 16,
                max_rate_bps: 1e9,
            },
            data: DataConfig {
                source: DataSource::Synthetic(SyntheticParams {
                    features,
                    flows: 600,
                    class_sep: 3.0,
                    malicious_fraction: 0.5,
                }),
                device_flows: 30,
                edge_flows: 40,
            },
            compute: ComputeConfig {
                device_cpu_min_hz: 1.9e9,
                device_cpu_max_hz: 2.4e9,
                cloud_cpu_hz: 4.0e9,
                cloud_rate_bps: 1e8,
                train_cycles_per_param_sample: 100.0,
                label_cycles_per_instance: 1e6,
                master_train_cycles_per_instance: 1e6,
                agg_cycles_per_param: 100.0,
                inference_cycles: 1e6,
            },
        }
    }

    pub fn num_stations(&self) -> usize {
        self.network.base_stations.len()
    }

    pub fn num_slaves(&self) -> usize {
        self.models.slaves.len()
    }

    pub fn master_index(&self) -> Option<usize> {
        self.models.slaves.iter().position(|s| s.model_id == self.models.master_id)
    }

    pub fn feature_dim(&self) -> Option<usize> {
        match &self.data.source {
            DataSource::Synthetic(p) => Some(p.features),
            DataSource::Csv { .. } => None,
        }
    }

    /// Collect every violation; nothing runs unless this passes.
    pub fn validate(&self) -> Result<()> {
        let mut issues: Vec<String> = Vec::new();
        let mut check = |ok: bool, msg: &str| {
            if !ok {
                issues.push(msg.to_string());
            }
        };

        check(self.devices >= 1, "devices must be >= 1");
        check(self.episodes >= 1, "episodes must be >= 1");
        check(self.repetitions >= 1, "repetitions must be >= 1");
        check(self.fl.epochs >= 1, "fl.epochs must be >= 1");
        check(self.fl.local_iters_k >= 1, "fl.local_iters_k must be >= 1");
        check(self.fl.lr >= 0.0, "fl.lr must be >= 0");
        check(self.fl.lr_decay > 0.0, "fl.lr_decay must be > 0");
        check((0.0..=1.0).contains(&self.fl.t_max), "fl.t_max must lie in [0, 1]");
        check(self.fl.bytes_per_param > 0.0, "fl.bytes_per_param must be > 0");

        check(self.network.grid.cells_per_side >= 1, "grid needs at least one cell");
        check(self.network.grid.cell_width > 0.0, "grid cell width must be > 0");
        check(!self.network.base_stations.is_empty(), "at least one base station required");
        for bs in &self.network.base_stations {
            check(bs.bandwidth_hz > 0.0, "station bandwidth must be > 0");
            check(bs.coverage_radius_m > 0.0, "station coverage radius must be > 0");
            check(bs.cpu_hz > 0.0, "station cpu must be > 0");
        }
        check(self.network.channel.path_loss_exp > 0.0, "path loss exponent must be > 0");
        check(self.network.channel.path_loss_coeff > 0.0, "path loss coefficient must be > 0");
        check(self.network.mobility.mean_speed_mps >= 0.0, "mean speed must be >= 0");
        check(self.network.mobility.dt_s >= 0.0, "mobility dt must be >= 0");

        check(!self.models.slaves.is_empty(), "at least one slave model required");
        for s in &self.models.slaves {
            let spec_check = s.validate();
            check(spec_check.is_ok(), &spec_check.err().map(|e| e.to_string()).unwrap_or_default());
        }
        let master_idx = self.master_index();
        check(master_idx.is_some(), "models.master_id must name one of the slave specs");
        if let Some(fdim) = self.feature_dim() {
            for s in &self.models.slaves {
                check(
                    s.input_dim == fdim,
                    &format!("model {} input_dim must equal the feature count {fdim}", s.model_id),
                );
            }
        }

        if self.attack.enabled {
            check(
                self.attack.compromised_min <= self.attack.compromised_max,
                "attack.compromised_min must not exceed compromised_max",
            );
            check(
                self.attack.compromised_max <= self.devices,
                "attack.compromised_max must not exceed the device count",
            );
            check(
                0.0 < self.attack.lr_min && self.attack.lr_min <= self.attack.lr_max && self.attack.lr_max <= 1.0,
                "attack crafting rates must satisfy 0 < min <= max <= 1",
            );
        }

        let s = &self.selector;
        check(s.alpha >= 0.0, "selector.alpha must be >= 0");
        if let Some(beta) = s.beta {
            check(beta >= 0.0, "selector.beta must be >= 0");
            check(s.alpha > 0.0 || beta > 0.0, "selector weights must not both be zero");
        }
        check((0.0..1.0).contains(&s.discount), "selector.discount must lie in [0, 1)");
        check((0.0..=1.0).contains(&s.eps_start), "selector.eps_start must lie in [0, 1]");
        check((0.0..=1.0).contains(&s.eps_end), "selector.eps_end must lie in [0, 1]");
        check(s.policy_lr >= 0.0, "selector.policy_lr must be >= 0");
        check(s.max_rate_bps > 0.0, "selector.max_rate_bps must be > 0");
        if let SelectorKind::Static(j) = s.kind {
            check(j < self.num_slaves(), "static selector index out of range");
            if master_idx == Some(j) {
                check(
                    master_quota(self.devices, self.fl.t_max) >= self.devices,
                    "static all-master selection conflicts with the master quota",
                );
            }
        }
        check(
            !(self.num_slaves() == 1
                && master_idx == Some(0)
                && master_quota(self.devices, self.fl.t_max) < self.devices),
            "single-model catalogue with a binding master quota has no feasible plan",
        );

        match &self.data.source {
            DataSource::Synthetic(p) => {
                check(p.features >= 2, "synthetic features must be >= 2");
                check(p.flows >= 1, "synthetic flows must be >= 1");
                check(
                    (0.0..=1.0).contains(&p.malicious_fraction),
                    "malicious fraction must lie in [0, 1]",
                );
                let train = self.data.device_flows * self.devices;
                check(
                    train < p.flows,
                    "device training flows must leave a nonempty test set",
                );
                check(self.data.edge_flows <= train, "edge set cannot exceed the training pool");
            }
            DataSource::Csv { path, schema_path } => {
                check(!path.is_empty(), "csv path must not be empty");
                check(!schema_path.is_empty(), "csv schema path must not be empty");
            }
        }

        let c = &self.compute;
        for (name, v) in [
            ("device_cpu_min_hz", c.device_cpu_min_hz),
            ("device_cpu_max_hz", c.device_cpu_max_hz),
            ("cloud_cpu_hz", c.cloud_cpu_hz),
            ("cloud_rate_bps", c.cloud_rate_bps),
        ] {
            check(v > 0.0, &format!("compute.{name} must be > 0"));
        }
        check(
            c.device_cpu_min_hz <= c.device_cpu_max_hz,
            "compute.device_cpu_min_hz must not exceed device_cpu_max_hz",
        );

        if issues.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(issues.join("; ")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn desk_default_is_valid() {
        ExperimentConfig::desk_default().validate().unwrap();
    }

    #[test]
    fn validation_collects_all_issues() {
        let mut cfg = ExperimentConfig::desk_default();
        cfg.devices = 0;
        cfg.fl.t_max = 2.0;
        cfg.models.master_id = "nope".into();
        let err = cfg.validate().unwrap_err().to_string();
        assert!(err.contains("devices"));
        assert!(err.contains("t_max"));
        assert!(err.contains("master_id"));
    }

    #[test]
    fn static_master_with_binding_quota_is_rejected() {
        let mut cfg = ExperimentConfig::desk_default();
        cfg.selector.kind = SelectorKind::Static(1); // the master slot
        let err = cfg.validate().unwrap_err().to_string();
        assert!(err.contains("all-master"));

        cfg.fl.t_max = 1.0;
        cfg.validate().unwrap();
    }

    #[test]
    fn json_round_trip() {
        let cfg = ExperimentConfig::desk_default();
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
        back.validate().unwrap();
        assert_eq!(serde_json::to_string(&back).unwrap(), serde_json::to_string(&cfg).unwrap());
    }
}
