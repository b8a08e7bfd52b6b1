//! Property tests for the spec-level invariants that hold for all
//! inputs: output ranges, the gain power law, verdict monotonicity,
//! mitigation soundness, aggregation envelopes, and plan feasibility.

use proptest::prelude::*;

use mmfl_core::net::{channel_gain, ChannelParams};
use mmfl_core::nn::{forward, init_model, loss, softmax_head, LabeledBatch, ModelSpec, ModelWeights};
use mmfl_core::protocol::{
    mitigate, partial_aggregate, validate_plan, AssignmentPlan, ModelRegistry, Upload,
};
use mmfl_core::rng::stream;
use mmfl_core::selector::random_selector;

fn arb_gru_spec() -> impl Strategy<Value = ModelSpec> {
    (1usize..5, 1usize..5).prop_map(|(i, h)| ModelSpec::gru("p", i, h))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn forward_stays_in_unit_interval(spec in arb_gru_spec(), seed in 0u64..1000, len in 1usize..6) {
        let w = init_model(&spec, &mut stream(seed, "prop")).unwrap();
        let mut rng = stream(seed ^ 0xabc, "prop-x");
        use rand::Rng;
        let seq: Vec<Vec<f64>> = (0..len)
            .map(|_| (0..spec.input_dim).map(|_| rng.random_range(-3.0..3.0)).collect())
            .collect();
        let p = forward(&w, &seq).unwrap();
        prop_assert!((0.0..=1.0).contains(&p));
    }

    #[test]
    fn loss_nonnegative(spec in arb_gru_spec(), seed in 0u64..1000) {
        let w = init_model(&spec, &mut stream(seed, "prop")).unwrap();
        let mut rng = stream(seed ^ 0x5f, "prop-x");
        use rand::Rng;
        let seqs: Vec<Vec<Vec<f64>>> = (0..3)
            .map(|_| vec![(0..spec.input_dim).map(|_| rng.random_range(-2.0..2.0)).collect()])
            .collect();
        let batch = LabeledBatch::new(seqs, vec![0.0, 1.0, 1.0]).unwrap();
        prop_assert!(loss(&w, &batch).unwrap() >= 0.0);
    }

    #[test]
    fn softmax_head_sums_to_one(l in 2usize..6, hidden in 0usize..4, seed in 0u64..1000) {
        let spec = ModelSpec::dense("p", 3, hidden, l);
        let w = init_model(&spec, &mut stream(seed, "prop")).unwrap();
        let q = softmax_head(&w, &[0.1, -0.4, 0.7]).unwrap();
        let sum: f64 = q.iter().sum();
        prop_assert!((sum - 1.0).abs() < 1e-9);
        prop_assert!(q.iter().all(|&v| v > 0.0));
    }

    #[test]
    fn gain_power_law_doubling(d in 1.0f64..500.0, exp in 0.5f64..6.0, coeff in 0.1f64..10.0) {
        let p = ChannelParams { path_loss_coeff: coeff, path_loss_exp: exp, noise_dbm: -174.0, device_tx_power_dbm: 23.0 };
        let ratio = channel_gain(2.0 * d, &p) / channel_gain(d, &p);
        prop_assert!((ratio - 2f64.powf(-exp)).abs() < 1e-12);
    }

    #[test]
    fn verdict_monotone_in_probabilities(probs in proptest::collection::vec(0.0f64..1.0, 10), bump in 0usize..10, delta in 0.0f64..1.0) {
        let before = mmfl_core::data::flow_verdict(&probs, 0.5, 0.7);
        let mut raised = probs.clone();
        raised[bump] = (raised[bump] + delta).min(1.0);
        let after = mmfl_core::data::flow_verdict(&raised, 0.5, 0.7);
        prop_assert!(after >= before);
    }

    #[test]
    fn mitigation_excludes_every_count_mismatch(extra in 1usize..40) {
        let registry = ModelRegistry::with_master_in_slaves(
            vec![ModelSpec::gru("a", 4, 3), ModelSpec::gru("b", 4, 5)],
            "b",
        ).unwrap();
        let plan = AssignmentPlan::new(0, vec![0, 1]);
        // device 0's upload carries the wrong number of parameters
        let mut wrong = ModelWeights::zeros(&registry.slaves[0]);
        wrong.params.extend(std::iter::repeat(0.0).take(extra));
        let ok = ModelWeights::zeros(&registry.slaves[1]);
        let ups = vec![
            Upload { device_id: 0, declared: wrong, batch_size: 1 },
            Upload { device_id: 1, declared: ok, batch_size: 1 },
        ];
        let (accepted, report) = mitigate(ups, &plan, &registry, false);
        prop_assert_eq!(accepted.len(), 1);
        prop_assert_eq!(accepted[0].device_id, 1);
        prop_assert_eq!(report.excluded_count(), 1);
    }

    #[test]
    fn aggregate_within_envelope(values in proptest::collection::vec(-5.0f64..5.0, 2..6), sizes in proptest::collection::vec(0usize..50, 6)) {
        let spec = ModelSpec::dense("s", 1, 0, 1);
        let uploads: Vec<Upload> = values
            .iter()
            .zip(&sizes)
            .enumerate()
            .map(|(d, (&v, &b))| {
                let mut w = ModelWeights::zeros(&spec);
                w.params = vec![v, -v];
                Upload { device_id: d, declared: w, batch_size: b }
            })
            .collect();
        let refs: Vec<&Upload> = uploads.iter().collect();
        let agg = partial_aggregate(&refs, &spec).unwrap();
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(agg.params[0] >= lo - 1e-12 && agg.params[0] <= hi + 1e-12);
    }

    #[test]
    fn random_plans_always_feasible(seed in 0u64..2000, n in 2usize..12, t_max in 0.0f64..1.0) {
        let plan = random_selector(&mut stream(seed, "prop-sel"), n, 2, t_max, Some(0), 0).unwrap();
        prop_assert!(validate_plan(&plan, n, 2, t_max, Some(0)).is_empty());
    }
}
