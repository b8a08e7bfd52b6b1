//! Plan construction: epsilon-greedy policy selection with quota repair,
//! the uniform random baseline, and the static single-model baseline.

use rand::Rng;

use super::{PolicyEnsemble, StateFeatures};
use crate::error::{Error, Result};
use crate::nn::softmax_head;
use crate::protocol::{master_quota, AssignmentPlan};
use crate::rng::SimRng;

const MAX_REJECTION_ATTEMPTS: usize = 100_000;

/// Uniform sample over feasible plans by rejection on the master quota.
pub fn random_selector(
    rng: &mut SimRng,
    n: usize,
    l: usize,
    t_max: f64,
    master_index: Option<usize>,
    epoch: usize,
) -> Result<AssignmentPlan> {
    let quota = master_quota(n, t_max);
    if let Some(mj) = master_index {
        // a one-model catalogue with a binding quota has no feasible plan
        if l == 1 && mj == 0 && quota < n {
            return Err(Error::Config(format!(
                "no feasible plan: single master model with quota {quota} < {n} devices"
            )));
        }
    }
    for _ in 0..MAX_REJECTION_ATTEMPTS {
        let assignment: Vec<usize> = (0..n).map(|_| rng.random_range(0..l)).collect();
        let masters = match master_index {
            Some(mj) => assignment.iter().filter(|&&j| j == mj).count(),
            None => 0,
        };
        if masters <= quota {
            return Ok(AssignmentPlan::new(epoch, assignment));
        }
    }
    Err(Error::Config("rejection sampling failed to find a feasible plan".into()))
}

/// Assign model `j` to every device; refused when that conflicts with
/// the master quota.
pub fn static_selector(
    j: usize,
    n: usize,
    l: usize,
    t_max: f64,
    master_index: Option<usize>,
    epoch: usize,
) -> Result<AssignmentPlan> {
    if j >= l {
        return Err(Error::Config(format!("static model index {j} out of range (l = {l})")));
    }
    if master_index == Some(j) && master_quota(n, t_max) < n {
        return Err(Error::Config(format!(
            "static all-master plan violates the quota ({} allowed of {n})",
            master_quota(n, t_max)
        )));
    }
    Ok(AssignmentPlan::new(epoch, vec![j; n]))
}

/// Argmax with ties resolved toward the lower index.
fn argmax(probs: &[f64]) -> usize {
    let mut best = 0;
    for (k, &p) in probs.iter().enumerate().skip(1) {
        if p > probs[best] {
            best = k;
        }
    }
    best
}

/// Best non-master head, ties toward the lower index.
fn best_excluding(probs: &[f64], excluded: usize) -> usize {
    let mut best = usize::MAX;
    for (k, &p) in probs.iter().enumerate() {
        if k == excluded {
            continue;
        }
        if best == usize::MAX || p > probs[best] {
            best = k;
        }
    }
    best
}

/// Epsilon-greedy action: with probability `eps` a uniform feasible
/// plan; otherwise each device takes its policy's argmax head, and while
/// the master quota is exceeded the master-assigned device with the
/// lowest master probability is demoted to its best non-master head.
pub fn select_action(
    ensemble: &PolicyEnsemble,
    state: &StateFeatures,
    eps: f64,
    rng: &mut SimRng,
    t_max: f64,
    master_index: Option<usize>,
    epoch: usize,
) -> Result<AssignmentPlan> {
    let n = ensemble.num_devices();
    let l = ensemble.num_models();
    if eps > 0.0 && rng.random_range(0.0..1.0) < eps {
        return random_selector(rng, n, l, t_max, master_index, epoch);
    }

    let probs: Vec<Vec<f64>> = ensemble
        .nets
        .iter()
        .map(|net| softmax_head(net, &state.0))
        .collect::<Result<_>>()?;
    let mut assignment: Vec<usize> = probs.iter().map(|p| argmax(p)).collect();

    if let Some(mj) = master_index {
        let quota = master_quota(n, t_max);
        if l == 1 && mj == 0 && quota < n {
            return Err(Error::Config(format!(
                "no feasible plan: single master model with quota {quota} < {n} devices"
            )));
        }
        loop {
            let masters: Vec<usize> =
                (0..n).filter(|&u| assignment[u] == mj).collect();
            if masters.len() <= quota {
                break;
            }
            let weakest = masters
                .into_iter()
                .min_by(|&a, &b| probs[a][mj].partial_cmp(&probs[b][mj]).unwrap())
                .unwrap();
            assignment[weakest] = best_excluding(&probs[weakest], mj);
        }
    }
    Ok(AssignmentPlan::new(epoch, assignment))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::ModelWeights;
    use crate::protocol::validate_plan;
    use crate::rng::stream;
    use crate::selector::state_dim;

    fn ensemble_with_bias(n: usize, l: usize, bias: impl Fn(usize) -> Vec<f64>) -> PolicyEnsemble {
        // hidden_dim 0 so b_out alone fixes the logits
        let mut e = PolicyEnsemble::new(n, 4, 0, l, &mut stream(1, "sel")).unwrap();
        for (u, net) in e.nets.iter_mut().enumerate() {
            *net = ModelWeights::zeros(&net.spec);
            let (boff, len) = net.tensor_range("b_out").unwrap();
            let b = bias(u);
            net.params[boff..boff + len].copy_from_slice(&b);
        }
        e
    }

    fn zero_state(dim: usize) -> StateFeatures {
        StateFeatures(vec![0.0; dim])
    }

    #[test]
    fn full_exploration_yields_feasible_plans() {
        let e = PolicyEnsemble::new(10, state_dim(10, 2, 2), 4, 2, &mut stream(2, "sel")).unwrap();
        let state = zero_state(state_dim(10, 2, 2));
        let mut rng = stream(3, "sel");
        for epoch in 0..200 {
            let plan = select_action(&e, &state, 1.0, &mut rng, 0.6, Some(0), epoch).unwrap();
            assert!(validate_plan(&plan, 10, 2, 0.6, Some(0)).is_empty());
        }
    }

    #[test]
    fn repair_caps_masters_at_quota() {
        // every device strongly prefers the master (head 0)
        let e = ensemble_with_bias(10, 2, |_| vec![5.0, 0.0]);
        let state = zero_state(4);
        let plan =
            select_action(&e, &state, 0.0, &mut stream(4, "sel"), 0.6, Some(0), 0).unwrap();
        let masters = plan.assignment.iter().filter(|&&j| j == 0).count();
        assert_eq!(masters, 6);
        assert!(validate_plan(&plan, 10, 2, 0.6, Some(0)).is_empty());
    }

    #[test]
    fn repair_demotes_lowest_master_probability_first() {
        // device 2 has the weakest master preference, so it is demoted
        let e = ensemble_with_bias(3, 2, |u| vec![if u == 2 { 1.0 } else { 3.0 }, 0.0]);
        let state = zero_state(4);
        let plan = select_action(&e, &state, 0.0, &mut stream(5, "sel"), 0.67, Some(0), 0).unwrap();
        assert_eq!(plan.assignment, vec![0, 0, 1]);
    }

    #[test]
    fn deterministic_argmax_without_exploration() {
        let e = ensemble_with_bias(2, 2, |u| if u == 0 { vec![2.0, 0.0] } else { vec![0.0, 2.0] });
        let state = zero_state(4);
        let a = select_action(&e, &state, 0.0, &mut stream(6, "sel"), 1.0, Some(0), 0).unwrap();
        assert_eq!(a.assignment, vec![0, 1]);
        let b = select_action(&e, &state, 0.0, &mut stream(7, "sel"), 1.0, Some(0), 0).unwrap();
        assert_eq!(a.assignment, b.assignment);
    }

    #[test]
    fn argmax_invariant_to_constant_logit_shift() {
        let shifted = ensemble_with_bias(2, 3, |_| vec![1.0, 2.0, 0.5]);
        let plain = ensemble_with_bias(2, 3, |_| vec![11.0, 12.0, 10.5]);
        let state = zero_state(4);
        let a = select_action(&shifted, &state, 0.0, &mut stream(8, "sel"), 1.0, None, 0).unwrap();
        let b = select_action(&plain, &state, 0.0, &mut stream(8, "sel"), 1.0, None, 0).unwrap();
        assert_eq!(a.assignment, b.assignment);
    }

    #[test]
    fn random_selector_always_feasible_and_seeded() {
        let mut rng = stream(9, "sel");
        for epoch in 0..10_000 {
            let plan = random_selector(&mut rng, 10, 2, 0.6, Some(0), epoch).unwrap();
            let masters = plan.assignment.iter().filter(|&&j| j == 0).count();
            assert!(masters <= 6);
        }
        let a = random_selector(&mut stream(10, "sel"), 10, 2, 0.6, Some(0), 0).unwrap();
        let b = random_selector(&mut stream(10, "sel"), 10, 2, 0.6, Some(0), 0).unwrap();
        assert_eq!(a.assignment, b.assignment);
    }

    #[test]
    fn static_selector_rules() {
        let all_master = static_selector(0, 10, 2, 1.0, Some(0), 0).unwrap();
        assert_eq!(all_master.assignment, vec![0; 10]);
        assert!(static_selector(0, 10, 2, 0.6, Some(0), 0).is_err());
        let all_slave = static_selector(1, 10, 2, 0.6, Some(0), 0).unwrap();
        assert!(validate_plan(&all_slave, 10, 2, 0.6, Some(0)).is_empty());
        assert!(static_selector(5, 10, 2, 1.0, Some(0), 0).is_err());
    }

    #[test]
    fn infeasible_single_master_catalogue_errors() {
        assert!(random_selector(&mut stream(11, "sel"), 10, 1, 0.6, Some(0), 0).is_err());
    }
}
