//! Scratch probe: can the recurrent model learn the synthetic flows, and
//! does per-step verdict accuracy track flow-level training?

use mmfl_core::data::{evaluate_accuracy, generate_synthetic, SyntheticParams};
use mmfl_core::nn::{forward, forward_steps, init_model, loss, train_local, LabeledBatch, ModelSpec};
use mmfl_core::rng::stream;

fn main() {
    let params = SyntheticParams { features: 8, flows: 300, class_sep: 3.0, malicious_fraction: 0.5 };
    let flows = generate_synthetic(&mut stream(7, "probe"), &params);
    let (train, test) = flows.split_at(200);

    // flow-level batch: full sequence -> flow label
    let flow_batch = LabeledBatch::new(
        train.iter().map(|f| f.feature_sequence()).collect(),
        train.iter().map(|f| f.label as f64).collect(),
    )
    .unwrap();

    // packet-prefix batch: flow[0..=t] -> label of packet t
    let mut seqs = Vec::new();
    let mut labels = Vec::new();
    for f in train {
        let seq = f.feature_sequence();
        for t in 0..seq.len() {
            seqs.push(seq[..=t].to_vec());
            labels.push(f.packets[t].label as f64);
        }
    }
    let prefix_batch = LabeledBatch::new(seqs, labels).unwrap();

    for (name, batch, lr, steps_per_round) in [
        ("flow-level lr0.25", &flow_batch, 0.25, 5),
        ("flow-level lr0.6", &flow_batch, 0.6, 5),
        ("prefix lr0.25", &prefix_batch, 0.25, 5),
        ("prefix lr0.6", &prefix_batch, 0.6, 5),
    ] {
        let spec = ModelSpec::gru("g", 8, 6);
        let mut w = init_model(&spec, &mut stream(3, "probe")).unwrap();
        print!("{name:20}");
        for round in 0..8 {
            w = train_local(&w, batch, lr, steps_per_round).unwrap();
            let acc = evaluate_accuracy(&w, test).unwrap();
            let flow_acc = test
                .iter()
                .filter(|f| (forward(&w, &f.feature_sequence()).unwrap() > 0.5) == (f.label == 1))
                .count() as f64
                / test.len() as f64;
            if round % 2 == 1 {
                print!(
                    "  [{} steps] L={:.3} verdict={:.2} flow={:.2}",
                    (round + 1) * steps_per_round,
                    loss(&w, batch).unwrap(),
                    acc,
                    flow_acc
                );
            }
        }
        println!();
        // per-step probabilities on two test flows
        let mal = test.iter().find(|f| f.label == 1).unwrap();
        let ben = test.iter().find(|f| f.label == 0).unwrap();
        let pm: Vec<String> = forward_steps(&w, &mal.feature_sequence()).unwrap().iter().map(|p| format!("{p:.2}")).collect();
        let pb: Vec<String> = forward_steps(&w, &ben.feature_sequence()).unwrap().iter().map(|p| format!("{p:.2}")).collect();
        println!("    malicious steps: {}", pm.join(" "));
        println!("    benign steps:    {}", pb.join(" "));
    }
}
