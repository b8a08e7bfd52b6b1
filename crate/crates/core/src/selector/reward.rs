//! Scalar reward shared by all policy networks.

/// Negated objective so that maximizing the reward minimizes the summed
/// loss and recognition time. An infeasible plan earns a dominated
/// penalty (ten times the objective magnitude, at least 10) instead of
/// the neutral zero, which would otherwise outrank every feasible
/// reward; the selectors' repair step keeps this branch unreachable in
/// normal operation.
pub fn reward(
    per_device_loss: &[f64],
    per_device_time: &[f64],
    alpha: f64,
    beta: f64,
    feasible: bool,
) -> f64 {
    debug_assert_eq!(per_device_loss.len(), per_device_time.len());
    let objective: f64 = per_device_loss
        .iter()
        .zip(per_device_time)
        .map(|(f, t)| alpha * f + beta * t)
        .sum();
    if feasible {
        -objective
    } else {
        -10.0 * objective.abs().max(1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_losses_and_times_give_zero() {
        assert_eq!(reward(&[0.0, 0.0], &[0.0, 0.0], 1.0, 1.0, true), 0.0);
    }

    #[test]
    fn hand_evaluation() {
        let r = reward(&[0.2], &[0.4], 0.5, 0.5, true);
        assert!((r + 0.3).abs() < 1e-15);
    }

    #[test]
    fn infeasible_penalty_dominates() {
        let losses = [0.2, 0.3];
        let times = [0.1, 0.4];
        let feasible = reward(&losses, &times, 1.0, 1.0, true);
        let penalty = reward(&losses, &times, 1.0, 1.0, false);
        assert!(penalty < feasible);
        assert!(penalty <= -10.0);
    }
}
