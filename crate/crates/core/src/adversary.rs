//! Model-poisoning adversary: compromises a few devices per episode and
//! uploads master-structured weights deviated toward a random malicious
//! target. The attacker knows the global model structure but not the
//! per-epoch plan, and never touches benign devices' uploads.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{ModelSpec, ModelWeights, INIT_SCALE};
use crate::protocol::Upload;
use crate::rng::SimRng;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttackConfig {
    pub enabled: bool,
    pub compromised_min: usize,
    pub compromised_max: usize,
    /// Crafting learning-rate interval (open).
    pub lr_min: f64,
    pub lr_max: f64,
    /// Target models are drawn from the init distribution scaled by this
    /// factor, placing them far from the benign region.
    pub target_scale: f64,
    /// Resample each device's crafting rate every epoch instead of once
    /// per episode.
    pub resample_lambda_per_epoch: bool,
}

impl Default for AttackConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            compromised_min: 3,
            compromised_max: 5,
            lr_min: 0.25,
            lr_max: 0.35,
            target_scale: 10.0,
            resample_lambda_per_epoch: false,
        }
    }
}

/// The devices compromised for one episode, with their crafting rates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompromiseSet {
    pub episode: usize,
    pub devices: Vec<usize>,
    pub lambdas: Vec<f64>,
}

impl CompromiseSet {
    pub fn empty(episode: usize) -> Self {
        Self { episode, devices: Vec::new(), lambdas: Vec::new() }
    }

    pub fn lambda_of(&self, device: usize) -> Option<f64> {
        self.devices.iter().position(|&d| d == device).map(|i| self.lambdas[i])
    }
}

/// Pick a uniform random subset of devices, its size uniform in
/// [compromised_min, compromised_max], fixed for the episode. Disabled
/// attacks yield an empty set.
pub fn select_compromised(rng: &mut SimRng, n: usize, config: &AttackConfig, episode: usize) -> CompromiseSet {
    if !config.enabled || config.compromised_max == 0 {
        return CompromiseSet::empty(episode);
    }
    debug_assert!(config.compromised_min <= config.compromised_max && config.compromised_max <= n);
    let size = rng.random_range(config.compromised_min..=config.compromised_max);
    let mut ids: Vec<usize> = (0..n).collect();
    ids.shuffle(rng);
    let mut devices: Vec<usize> = ids[..size].to_vec();
    devices.sort_unstable();
    let lambdas = devices.iter().map(|_| rng.random_range(config.lr_min..config.lr_max)).collect();
    CompromiseSet { episode, devices, lambdas }
}

/// Poisoned weights: the global model stepped toward the target with
/// crafting rate lambda, keeping the master structure.
pub fn craft_poisoned(global: &ModelWeights, target: &ModelWeights, lambda: f64) -> Result<ModelWeights> {
    if !global.spec.structurally_eq(&target.spec) {
        return Err(Error::StructuralMismatch(format!(
            "target {} does not match global {}",
            target.spec.model_id, global.spec.model_id
        )));
    }
    let params = global
        .params
        .iter()
        .zip(&target.params)
        .map(|(g, t)| g + lambda * (t - g))
        .collect();
    Ok(ModelWeights { spec: global.spec.clone(), params })
}

/// A fresh random target with the master structure, drawn from the init
/// distribution scaled by `target_scale`.
pub fn random_target(spec: &ModelSpec, scale: f64, rng: &mut SimRng) -> ModelWeights {
    let bound = INIT_SCALE * scale;
    let params = (0..spec.param_count()).map(|_| rng.random_range(-bound..bound)).collect();
    ModelWeights { spec: spec.clone(), params }
}

/// Replace every compromised device's genuine upload with a crafted
/// master-structured one (fresh target per device per epoch). Benign
/// uploads are untouched; a compromised device that did not upload this
/// epoch stays absent.
pub fn inject(
    uploads: &mut [Upload],
    set: &CompromiseSet,
    global: &ModelWeights,
    config: &AttackConfig,
    rng: &mut SimRng,
) -> Result<()> {
    for upload in uploads.iter_mut() {
        let Some(mut lambda) = set.lambda_of(upload.device_id) else {
            continue;
        };
        if config.resample_lambda_per_epoch {
            lambda = rng.random_range(config.lr_min..config.lr_max);
        }
        let target = random_target(&global.spec, config.target_scale, rng);
        upload.declared = craft_poisoned(global, &target, lambda)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::init_model;
    use crate::rng::stream;

    fn cfg() -> AttackConfig {
        AttackConfig::default()
    }

    #[test]
    fn disabled_attack_selects_nobody() {
        let mut config = cfg();
        config.enabled = false;
        let set = select_compromised(&mut stream(1, "adv"), 10, &config, 0);
        assert!(set.devices.is_empty());
    }

    #[test]
    fn sizes_uniform_over_range() {
        let config = cfg();
        let mut rng = stream(2, "adv");
        let mut counts = [0usize; 3];
        let n = 10_000;
        for ep in 0..n {
            let set = select_compromised(&mut rng, 10, &config, ep);
            assert!(set.devices.len() >= 3 && set.devices.len() <= 5);
            counts[set.devices.len() - 3] += 1;
            for l in &set.lambdas {
                assert!((0.25..0.35).contains(l));
            }
        }
        for c in counts {
            let frac = c as f64 / n as f64;
            assert!((frac - 1.0 / 3.0).abs() <= 0.02, "size fraction {frac}");
        }
    }

    #[test]
    fn selection_deterministic_under_seed() {
        let config = cfg();
        let a = select_compromised(&mut stream(3, "adv"), 10, &config, 7);
        let b = select_compromised(&mut stream(3, "adv"), 10, &config, 7);
        assert_eq!(a.devices, b.devices);
        assert_eq!(a.lambdas, b.lambdas);
    }

    #[test]
    fn crafting_endpoints_and_scalar_case() {
        let spec = ModelSpec::dense("m", 1, 0, 1);
        let mut global = ModelWeights::zeros(&spec);
        let mut target = ModelWeights::zeros(&spec);
        global.params = vec![2.0, 0.0];
        target.params = vec![12.0, 0.0];

        assert_eq!(craft_poisoned(&global, &target, 0.0).unwrap().params, global.params);
        assert_eq!(craft_poisoned(&global, &target, 1.0).unwrap().params, target.params);
        let mid = craft_poisoned(&global, &target, 0.3).unwrap();
        assert!((mid.params[0] - 5.0).abs() < 1e-15);
    }

    #[test]
    fn crafting_affine_identity() {
        let spec = ModelSpec::gru("m", 4, 3);
        let global = init_model(&spec, &mut stream(4, "adv")).unwrap();
        let target = random_target(&spec, 10.0, &mut stream(5, "adv"));
        let lambda = 0.31;
        let crafted = craft_poisoned(&global, &target, lambda).unwrap();
        for i in 0..global.params.len() {
            let lhs = crafted.params[i] - global.params[i];
            let rhs = lambda * (target.params[i] - global.params[i]);
            // equal up to the one rounding of the final addition
            assert!((lhs - rhs).abs() <= f64::EPSILON * rhs.abs().max(1.0));
        }
    }

    #[test]
    fn structural_mismatch_rejected() {
        let global = ModelWeights::zeros(&ModelSpec::gru("m", 4, 3));
        let target = ModelWeights::zeros(&ModelSpec::gru("m", 4, 4));
        assert!(craft_poisoned(&global, &target, 0.3).is_err());
    }

    #[test]
    fn inject_replaces_only_compromised_uploads() {
        let master = ModelSpec::gru("master", 3, 4);
        let small = ModelSpec::gru("small", 3, 2);
        let global = init_model(&master, &mut stream(6, "adv")).unwrap();
        let benign_w = init_model(&small, &mut stream(7, "adv")).unwrap();

        let mut uploads = vec![
            Upload { device_id: 0, declared: benign_w.clone(), batch_size: 5 },
            Upload { device_id: 1, declared: benign_w.clone(), batch_size: 5 },
        ];
        let set = CompromiseSet { episode: 0, devices: vec![1], lambdas: vec![0.3] };
        inject(&mut uploads, &set, &global, &cfg(), &mut stream(8, "adv")).unwrap();

        assert_eq!(uploads[0].declared, benign_w);
        assert_eq!(uploads[1].declared.param_count(), master.param_count());
        assert!(uploads[1].declared.spec.structurally_eq(&master));

        // empty set leaves everything untouched
        let mut untouched = vec![Upload { device_id: 0, declared: benign_w.clone(), batch_size: 5 }];
        inject(&mut untouched, &CompromiseSet::empty(0), &global, &cfg(), &mut stream(9, "adv")).unwrap();
        assert_eq!(untouched[0].declared, benign_w);
    }
}
