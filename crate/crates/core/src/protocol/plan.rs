//! Plan feasibility: one model per device and the master-selection quota.

use serde::{Deserialize, Serialize};

use super::AssignmentPlan;

/// Maximum number of devices that may train the master per epoch:
/// floor(N * T_max), with a small guard against float rounding.
pub fn master_quota(n: usize, t_max: f64) -> usize {
    ((n as f64) * t_max + 1e-9).floor() as usize
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum PlanViolation {
    /// A device the plan does not cover (no model assigned).
    MissingAssignment { device: usize },
    /// An assignment outside the slave catalogue.
    InvalidModel { device: usize, index: usize },
    /// More master assignments than the quota admits.
    MasterQuota { count: usize, max: usize },
}

impl std::fmt::Display for PlanViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PlanViolation::MissingAssignment { device } => {
                write!(f, "device {device} has no model assigned")
            }
            PlanViolation::InvalidModel { device, index } => {
                write!(f, "device {device} assigned unknown model {index}")
            }
            PlanViolation::MasterQuota { count, max } => {
                write!(f, "{count} master assignments exceed the quota of {max}")
            }
        }
    }
}

/// Check a plan against the device count, catalogue size, and quota.
/// Returns every violation found; an empty list means the plan is valid.
/// Never repairs.
pub fn validate_plan(
    plan: &AssignmentPlan,
    n: usize,
    l: usize,
    t_max: f64,
    master_index: Option<usize>,
) -> Vec<PlanViolation> {
    let mut violations = Vec::new();
    for device in plan.assignment.len()..n {
        violations.push(PlanViolation::MissingAssignment { device });
    }
    for (device, &index) in plan.assignment.iter().enumerate().take(n) {
        if index >= l {
            violations.push(PlanViolation::InvalidModel { device, index });
        }
    }
    if let Some(mj) = master_index {
        let count = plan.assignment.iter().take(n).filter(|&&j| j == mj).count();
        let max = master_quota(n, t_max);
        if count > max {
            violations.push(PlanViolation::MasterQuota { count, max });
        }
    }
    violations
}
