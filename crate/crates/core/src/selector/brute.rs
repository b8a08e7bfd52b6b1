//! Exhaustive plan search over toy instances, used as the optimality
//! oracle for the learned selector.

use super::super::protocol::{master_quota, AssignmentPlan};
use crate::error::{Error, Result};

/// Hard cap on the enumerated space.
pub const MAX_CANDIDATES: u128 = 4096;

/// Enumerate every feasible plan in lexicographic order (device 0 is the
/// most significant digit), evaluate each with `objective`, and return
/// the strict minimizer; ties keep the lexicographically first plan.
pub fn brute_force_selector(
    n: usize,
    l: usize,
    t_max: f64,
    master_index: Option<usize>,
    epoch: usize,
    objective: &mut dyn FnMut(&AssignmentPlan) -> Result<f64>,
) -> Result<AssignmentPlan> {
    let total = (l as u128).pow(n as u32);
    if total > MAX_CANDIDATES {
        return Err(Error::InstanceTooLarge(total));
    }
    let quota = master_quota(n, t_max);

    let mut best: Option<(f64, AssignmentPlan)> = None;
    let mut assignment = vec![0usize; n];
    loop {
        let feasible = match master_index {
            Some(mj) => assignment.iter().filter(|&&j| j == mj).count() <= quota,
            None => true,
        };
        if feasible {
            let plan = AssignmentPlan::new(epoch, assignment.clone());
            let value = objective(&plan)?;
            let better = match &best {
                None => true,
                Some((v, _)) => value < *v,
            };
            if better {
                best = Some((value, plan));
            }
        }
        // increment the base-l counter, least significant digit last
        let mut pos = n;
        loop {
            if pos == 0 {
                return best
                    .map(|(_, p)| p)
                    .ok_or_else(|| Error::Config("no feasible plan in the search space".into()));
            }
            pos -= 1;
            assignment[pos] += 1;
            if assignment[pos] < l {
                break;
            }
            assignment[pos] = 0;
        }
    }
}
