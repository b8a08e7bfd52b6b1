//! Bellman update of the policy ensemble: the chosen head of each
//! device's network regresses toward reward + discount * max next-state
//! head value, one gradient step per transition.

use super::{PolicyEnsemble, Transition};
use crate::error::{Error, Result};
use crate::nn::{grad_q_regression, softmax_head};

pub fn update(ensemble: &mut PolicyEnsemble, transition: &Transition, gamma: f64, lr: f64) -> Result<()> {
    if !transition.reward.is_finite() {
        return Err(Error::NonFinite("transition reward".into()));
    }
    for (u, net) in ensemble.nets.iter_mut().enumerate() {
        let next_q = softmax_head(net, &transition.next_state.0)?;
        let max_next = next_q.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let target = transition.reward + gamma * max_next;
        if !target.is_finite() {
            return Err(Error::NonFinite(format!("bellman target of device {u}")));
        }
        let chosen = transition.plan.assignment[u];
        let (_, grad) = grad_q_regression(net, &transition.state.0, chosen, target)?;
        for (p, g) in net.params.iter_mut().zip(&grad) {
            *p -= lr * g;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::AssignmentPlan;
    use crate::rng::stream;
    use crate::selector::StateFeatures;

    fn setup() -> (PolicyEnsemble, Transition) {
        let ensemble = PolicyEnsemble::new(2, 4, 3, 2, &mut stream(61, "upd")).unwrap();
        let t = Transition {
            state: StateFeatures(vec![0.2, 0.4, 1.0, 0.0]),
            plan: AssignmentPlan::new(0, vec![0, 1]),
            reward: -0.8,
            next_state: StateFeatures(vec![0.3, 0.3, 1.0, 0.0]),
        };
        (ensemble, t)
    }

    #[test]
    fn zero_lr_is_identity() {
        let (mut e, t) = setup();
        let before: Vec<Vec<f64>> = e.nets.iter().map(|n| n.params.clone()).collect();
        update(&mut e, &t, 0.1, 0.0).unwrap();
        for (net, b) in e.nets.iter().zip(&before) {
            assert_eq!(&net.params, b);
        }
    }

    #[test]
    fn zero_discount_targets_immediate_reward() {
        // with gamma = 0 the chosen head's squared error against the raw
        // reward must shrink after one update
        let (mut e, t) = setup();
        let q0 = softmax_head(&e.nets[0], &t.state.0).unwrap()[0];
        let err0 = (q0 - t.reward).powi(2);
        update(&mut e, &t, 0.0, 0.5).unwrap();
        let q1 = softmax_head(&e.nets[0], &t.state.0).unwrap()[0];
        let err1 = (q1 - t.reward).powi(2);
        assert!(err1 < err0);
    }

    #[test]
    fn repeated_updates_converge_monotonically() {
        let (mut e, t) = setup();
        let target_of = |e: &PolicyEnsemble| {
            let next_q = softmax_head(&e.nets[0], &t.next_state.0).unwrap();
            t.reward + 0.1 * next_q.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        };
        let mut prev_err = f64::INFINITY;
        for _ in 0..100 {
            let target = target_of(&e);
            let q = softmax_head(&e.nets[0], &t.state.0).unwrap()[0];
            let err = (q - target).powi(2);
            assert!(err <= prev_err + 1e-12, "error rose: {prev_err} -> {err}");
            prev_err = err;
            update(&mut e, &t, 0.1, 0.1).unwrap();
        }
        // the chosen head is pushed toward the (unreachable, negative)
        // target, so its probability keeps shrinking
        let q = softmax_head(&e.nets[0], &t.state.0).unwrap();
        assert!(q[0] < 0.5);
    }

    #[test]
    fn non_finite_reward_rejected() {
        let (mut e, mut t) = setup();
        t.reward = f64::INFINITY;
        assert!(update(&mut e, &t, 0.1, 0.1).is_err());
    }
}
