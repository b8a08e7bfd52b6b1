//! Scratch probe for tuning desk-scale scenario configs.

use mmfl_core::data::SyntheticParams;
use mmfl_core::experiment::{run_scenario, DataSource, ExperimentConfig, Scenario};
use mmfl_core::nn::ModelSpec;

fn accept_config() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::desk_default();
    let features = 8;
    cfg.devices = 10;
    cfg.seed = 1234;
    cfg.repetitions = 5;
    cfg.episodes = 1;
    cfg.fl.epochs = 12;
    cfg.fl.local_iters_k = 6;
    cfg.fl.lr = 0.8;
    cfg.fl.lr_decay = 0.75;
    cfg.fl.kt_lr = 0.5;
    cfg.fl.kt_passes = 15;
    cfg.models.slaves = vec![
        ModelSpec::gru("gru-small", features, 4),
        ModelSpec::gru("gru-large", features, 6),
    ];
    cfg.models.master_id = "gru-large".into();
    cfg.data.source = DataSource::Synthetic(SyntheticParams {
        features,
        flows: 450,
        class_sep: 3.0,
        malicious_fraction: 0.5,
    });
    cfg.data.device_flows = 25;
    cfg.data.edge_flows = 40;
    cfg.compute.label_cycles_per_instance = 100.0;
    cfg.compute.master_train_cycles_per_instance = 100.0;
    cfg
}

fn show(tag: &str, cfg: &ExperimentConfig, scenario: Scenario) {
    let t0 = std::time::Instant::now();
    let rec = run_scenario(cfg, scenario).unwrap();
    let acc = rec.mean_accuracy();
    let t = rec.mean_recognition();
    println!(
        "{tag:28} acc(final)={:.3} acc={:?} meanT(final)={:.6} [{:.1}s]",
        acc.last().unwrap(),
        acc.iter().map(|a| (a * 100.0).round() / 100.0).collect::<Vec<_>>(),
        t.last().unwrap(),
        t0.elapsed().as_secs_f64()
    );
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let which = args.get(1).map(String::as_str).unwrap_or("c7");

    match which {
        "c7" => {
            let cfg = accept_config();
            show("fl-single-noattack", &cfg, Scenario::FlSingle { attack: false });
            show("fl-single-attack", &cfg, Scenario::FlSingle { attack: true });
        }
        "c8" => {
            let mut cfg = accept_config();
            cfg.episodes = 40;
            cfg.fl.epochs = 12;
            show("mmfl-rnd-attack", &cfg, Scenario::MmflRnd { attack: true });
            show("mmfl-drl-attack", &cfg, Scenario::MmflDrl { attack: true });
            let mut base = cfg.clone();
            base.episodes = 1;
            show("fl-single-attack", &base, Scenario::FlSingle { attack: true });
            show("fl-single-noattack", &base, Scenario::FlSingle { attack: false });
        }
        "scale" => {
            for scale in [20.0, 40.0] {
                let mut cfg = accept_config();
                cfg.episodes = 1;
                cfg.repetitions = 3;
                cfg.fl.epochs = 12;
                cfg.attack.target_scale = scale;
                show(&format!("single-attack x{scale}"), &cfg, Scenario::FlSingle { attack: true });
                show(&format!("rnd-attack x{scale}"), &cfg, Scenario::MmflRnd { attack: true });
            }
        }
        "decay" => {
            for (lr, decay) in [(0.8, 0.65), (0.8, 0.75), (1.0, 0.7)] {
                let mut cfg = accept_config();
                cfg.episodes = 1;
                cfg.repetitions = 5;
                cfg.fl.epochs = 12;
                cfg.fl.lr = lr;
                cfg.fl.lr_decay = decay;
                let tag = format!("lr{lr}/d{decay}");
                show(&format!("single-clean {tag}"), &cfg, Scenario::FlSingle { attack: false });
                show(&format!("single-attack {tag}"), &cfg, Scenario::FlSingle { attack: true });
                show(&format!("rnd-attack {tag}"), &cfg, Scenario::MmflRnd { attack: true });
            }
        }
        "c6" => {
            use mmfl_core::protocol::AssignmentPlan;
            use mmfl_core::rng::stream;
            use mmfl_core::selector::{
                brute_force_selector, select_action, update, PolicyEnsemble, StateFeatures,
                Transition,
            };
            let (n, l) = (2usize, 2usize);
            for (scale, lr, epochs, hidden) in [
                (1.0, 0.02, 4usize, 8usize),
                (1.0, 0.05, 8, 8),
                (1.0, 0.02, 8, 4),
                (0.3, 0.05, 8, 8),
                (0.3, 0.1, 8, 8),
                (3.0, 0.05, 8, 8),
                (1.0, 0.01, 12, 8),
                (1.0, 0.03, 12, 4),
            ] {
                let cost = move |plan: &AssignmentPlan| -> f64 {
                    plan.assignment.iter().map(|&j| if j == 0 { 0.3 * scale } else { 1.1 * scale }).sum()
                };
                let t_max = 1.0;
                let master = Some(1usize);
                let oracle =
                    brute_force_selector(n, l, t_max, master, 0, &mut |p| Ok(cost(p))).unwrap();
                let mut total = 0usize;
                let mut seeds_ok = 0usize;
                for seed in 0..10u64 {
                    let dim = 2 + l * n;
                    let encode = |prev: &AssignmentPlan| -> StateFeatures {
                        let mut f = vec![0.4, 0.7];
                        for u in 0..n {
                            for j in 0..l {
                                f.push(f64::from(prev.assignment[u] == j));
                            }
                        }
                        StateFeatures(f)
                    };
                    let mut rng = stream(400 + seed, "c6");
                    let mut ens = PolicyEnsemble::new(n, dim, hidden, l, &mut rng).unwrap();
                    let mut prev = AssignmentPlan::new(0, vec![0; n]);
                    for ep in 0..200 {
                        let eps = 1.0 + (0.02 - 1.0) * ep as f64 / 199.0;
                        for epoch in 0..epochs {
                            let st = encode(&prev);
                            let plan =
                                select_action(&ens, &st, eps, &mut rng, t_max, master, epoch)
                                    .unwrap();
                            let r = -cost(&plan);
                            let t = Transition {
                                state: st,
                                plan: plan.clone(),
                                reward: r,
                                next_state: encode(&plan),
                            };
                            update(&mut ens, &t, 0.1, lr).unwrap();
                            prev = plan;
                        }
                    }
                    let mut matches = 0;
                    for epoch in 0..50 {
                        let st = encode(&prev);
                        let plan =
                            select_action(&ens, &st, 0.0, &mut rng, t_max, master, epoch)
                                .unwrap();
                        if plan.assignment == oracle.assignment {
                            matches += 1;
                        }
                        prev = plan;
                    }
                    total += matches;
                    seeds_ok += usize::from(matches >= 45);
                }
                println!(
                    "scale={scale} lr={lr} epochs={epochs} hidden={hidden}: mean={:.1}/50, seeds>=45: {seeds_ok}/10",
                    total as f64 / 10.0
                );
            }
        }
        "mm" => {
            let mut cfg = accept_config();
            cfg.episodes = 1;
            cfg.repetitions = 2;
            cfg.fl.epochs = 12;
            show("mmfl-rnd-noattack e12", &cfg, Scenario::MmflRnd { attack: false });
            cfg.fl.kt_passes = 4;
            show("rnd-noattack kt4", &cfg, Scenario::MmflRnd { attack: false });
            cfg.fl.kt_passes = 15;
            cfg.data.edge_flows = 80;
            show("rnd-noattack edge80", &cfg, Scenario::MmflRnd { attack: false });
            cfg.data.edge_flows = 40;
            cfg.fl.t_max = 0.4;
            show("rnd-noattack tmax.4", &cfg, Scenario::MmflRnd { attack: false });
            cfg.fl.t_max = 0.6;
            cfg.attack.enabled = true;
            show("rnd-attack e12", &cfg, Scenario::MmflRnd { attack: true });
            cfg.fl.t_max = 0.4;
            show("rnd-attack tmax.4", &cfg, Scenario::MmflRnd { attack: true });
        }
        "c10" => {
            let mut cfg = accept_config();
            cfg.repetitions = 1;
            cfg.episodes = 200;
            cfg.fl.epochs = 5;
            let t0 = std::time::Instant::now();
            let rec = run_scenario(&cfg, Scenario::MmflDrl { attack: true }).unwrap();
            let r = &rec.reps[0].episode_rewards;
            let ma = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
            println!(
                "first20={:.3} last20={:.3}  full=[{:.2} .. {:.2}] [{:.1}s]",
                ma(&r[..20]),
                ma(&r[r.len() - 20..]),
                r.first().unwrap(),
                r.last().unwrap(),
                t0.elapsed().as_secs_f64()
            );
        }
        "c9" => {
            let mut large_master = accept_config();
            large_master.attack.enabled = false;
            large_master.fl.epochs = 6;
            show("mmfl-rnd large-master", &large_master, Scenario::MmflRnd { attack: false });
            show("fl-single large", &large_master, Scenario::FlSingle { attack: false });
            let mut small_master = large_master.clone();
            small_master.models.master_id = "gru-small".into();
            show("mmfl-rnd small-master", &small_master, Scenario::MmflRnd { attack: false });
            show("fl-single small", &small_master, Scenario::FlSingle { attack: false });
        }
        other => eprintln!("unknown probe {other}"),
    }
}
