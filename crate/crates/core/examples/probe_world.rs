//! Scratch probe: per-replica accuracy inside the multi-model pipeline.

use mmfl_core::adversary::select_compromised;
use mmfl_core::data::{evaluate_accuracy, flows_to_batch, generate_synthetic, partition, PartitionSpec, SyntheticParams};
use mmfl_core::net::{random_pose, snapshot, step_mobility, BaseStation, ChannelParams, GridMap};
use mmfl_core::nn::{init_model, ModelSpec, ModelWeights};
use mmfl_core::protocol::{run_epoch, AdversaryHook, DeviceState, EdgeState, FlParams, ModelRegistry, WorldState};
use mmfl_core::rng::stream;
use mmfl_core::selector::random_selector;
use mmfl_core::timing::ComputeProfile;
use mmfl_core::adversary::AttackConfig;
use rand::Rng;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let attack_on = args.get(1).map(String::as_str) == Some("attack");
    let lr0: f64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(0.8);
    let decay: f64 = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(0.75);
    let k: usize = args.get(4).and_then(|s| s.parse().ok()).unwrap_or(6);

    let seed = 1234u64;
    let n = 10;
    let features = 8;
    let registry = ModelRegistry::with_master_in_slaves(
        vec![ModelSpec::gru("gru-small", features, 4), ModelSpec::gru("gru-large", features, 6)],
        "gru-large",
    )
    .unwrap();

    let mut data_rng = stream(seed, "data");
    let flows = generate_synthetic(
        &mut data_rng,
        &SyntheticParams { features, flows: 450, class_sep: 3.0, malicious_fraction: 0.5 },
    );
    let split = partition(
        flows,
        &PartitionSpec { device_flows: vec![25; n], edge_sets: 2, edge_flows: 40 },
        &mut data_rng,
    )
    .unwrap();

    let stations = vec![
        BaseStation { id: 0, x: 50.0, y: 50.0, bandwidth_hz: 28e6, coverage_radius_m: 300.0, tx_power_dbm: 34.0, cpu_hz: 3.2e9 },
        BaseStation { id: 1, x: 350.0, y: 350.0, bandwidth_hz: 30e6, coverage_radius_m: 300.0, tx_power_dbm: 34.0, cpu_hz: 2.6e9 },
    ];
    let channel = ChannelParams { path_loss_coeff: 1.0, path_loss_exp: 5.0, noise_dbm: -174.0, device_tx_power_dbm: 23.0 };
    let grid = GridMap { cells_per_side: 4, cell_width: 100.0 };

    let mut cpu_rng = stream(seed, "cpu");
    let profile = ComputeProfile {
        bs_cpu_hz: vec![3.2e9, 2.6e9],
        cloud_cpu_hz: 4e9,
        device_cpu_hz: (0..n).map(|_| cpu_rng.random_range(1.9e9..=2.4e9)).collect(),
        label_cycles: vec![1e4; 2],
        master_train_cycles: 1e4,
        agg_cycles_per_param: 100.0,
        train_cycles_per_param_sample: 100.0,
        inference_cycles: 1e6,
        cloud_rate_pps: 3.125e6,
    };

    let mut init_rng = stream(seed, "init:0");
    let slave_weights: Vec<ModelWeights> =
        registry.slaves.iter().map(|s| init_model(s, &mut init_rng).unwrap()).collect();
    let master = slave_weights[1].clone();
    let edges: Vec<EdgeState> = (0..2)
        .map(|bs| EdgeState::new(bs, &registry, slave_weights.clone(), master.clone(), split.edge_unlabeled[bs].clone()).unwrap())
        .collect();
    let devices: Vec<DeviceState> = (0..n)
        .map(|u| DeviceState { id: u, train: flows_to_batch(&split.device_train[u]).unwrap(), delivered: None })
        .collect();
    let mut world = WorldState { registry: registry.clone(), devices, edges, global_master: master, test_flows: split.test.clone() };

    let mut pose_rng = stream(seed, "poses:0");
    let mut poses: Vec<_> = (0..n)
        .map(|_| {
            let speed = 12.5 * pose_rng.random_range(0.8..=1.2);
            random_pose(&grid, &mut pose_rng, speed)
        })
        .collect();
    let mut mob_rng = stream(seed, "mobility");
    let mut sel_rng = stream(seed, "selector");
    let mut adv_rng = stream(seed, "adversary");
    let mut craft_rng = stream(seed, "adversary-craft");
    let attack = AttackConfig::default();
    let set = select_compromised(&mut adv_rng, n, &attack, 0);
    println!("compromised: {:?} attack={}", set.devices, attack_on);

    let mut lr = lr0;
    for epoch in 0..14 {
        step_mobility(&mut poses, &grid, &mut mob_rng, 1.0);
        let snap = snapshot(&poses, &stations, &channel, epoch);
        let plan = random_selector(&mut sel_rng, n, 2, 0.6, Some(1), epoch).unwrap();
        let masters = plan.assignment.iter().filter(|&&j| j == 1).count();
        let fl = FlParams {
            local_iters_k: k,
            lr,
            kt_lr: 0.5,
            kt_passes: 15,
            knowledge_transfer: true,
            signature_check: false,
            t_max: 0.6,
            shared_local_barrier: true,
            bits_per_param: 32.0,
        };
        let hook = attack_on.then_some(AdversaryHook { set: &set, config: &attack, rng: &mut craft_rng });
        let (m, rep) = run_epoch(&mut world, &plan, &snap, &profile, &fl, hook).unwrap();
        let small0 = evaluate_accuracy(&world.edges[0].slaves[0], &world.test_flows).unwrap();
        let small1 = evaluate_accuracy(&world.edges[1].slaves[0], &world.test_flows).unwrap();
        println!(
            "epoch {epoch:2} lr={lr:.3} masters={masters} excl={} acc(Mc)={:.2} small@bs0={small0:.2} small@bs1={small1:.2} loss={:.3}",
            rep.excluded_count(),
            m.accuracy,
            m.global_loss
        );
        lr *= decay;
    }
}
