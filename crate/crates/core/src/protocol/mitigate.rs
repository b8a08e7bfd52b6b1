//! Structural mismatch mitigation: an upload is accepted only when its
//! parameter count equals the count of the model planned for that
//! device. Purely structural; poisoned values inside a well-shaped
//! upload pass through.

use serde::{Deserialize, Serialize};

use super::{AssignmentPlan, ModelRegistry, Upload};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExclusionReason {
    /// Declared parameter count differs from the planned model's.
    StructureMismatch,
    /// Upload from a device the plan does not cover.
    UnplannedDevice,
}

impl std::fmt::Display for ExclusionReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ExclusionReason::StructureMismatch => write!(f, "structure mismatch"),
            ExclusionReason::UnplannedDevice => write!(f, "unplanned device"),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct MitigationReport {
    pub epoch: usize,
    pub excluded: Vec<(usize, ExclusionReason)>,
    /// Accepted uploads per slave index (the per-model aggregation counts).
    pub included_per_slave: Vec<usize>,
}

impl MitigationReport {
    pub fn excluded_count(&self) -> usize {
        self.excluded.len()
    }

    pub fn accepted_count(&self) -> usize {
        self.included_per_slave.iter().sum()
    }
}

/// Split uploads into accepted ones and a report of exclusions. With
/// `signature_check` the full shape map must match, not just the count;
/// the count rule alone is the default.
pub fn mitigate(
    uploads: Vec<Upload>,
    plan: &AssignmentPlan,
    registry: &ModelRegistry,
    signature_check: bool,
) -> (Vec<Upload>, MitigationReport) {
    let mut accepted = Vec::with_capacity(uploads.len());
    let mut report = MitigationReport {
        epoch: plan.epoch,
        excluded: Vec::new(),
        included_per_slave: vec![0; registry.num_slaves()],
    };
    for upload in uploads {
        let Some(&slot) = plan.assignment.get(upload.device_id) else {
            report.excluded.push((upload.device_id, ExclusionReason::UnplannedDevice));
            continue;
        };
        let planned = &registry.slaves[slot];
        let count_ok = upload.declared.param_count() == planned.param_count();
        let shape_ok = !signature_check || upload.declared.spec.structurally_eq(planned);
        if count_ok && shape_ok {
            report.included_per_slave[slot] += 1;
            accepted.push(upload);
        } else {
            report.excluded.push((upload.device_id, ExclusionReason::StructureMismatch));
        }
    }
    (accepted, report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{ModelSpec, ModelWeights};

    fn registry() -> ModelRegistry {
        ModelRegistry::with_master_in_slaves(
            vec![ModelSpec::gru("gru28", 8, 4), ModelSpec::gru("gru32", 8, 6)],
            "gru32",
        )
        .unwrap()
    }

    fn upload(device: usize, spec: &ModelSpec) -> Upload {
        Upload { device_id: device, declared: ModelWeights::zeros(spec), batch_size: 10 }
    }

    #[test]
    fn mismatched_structure_excluded() {
        let reg = registry();
        // device 0 planned the small model but uploads master-shaped weights
        let plan = AssignmentPlan::new(3, vec![0, 1]);
        let ups = vec![upload(0, &reg.slaves[1]), upload(1, &reg.slaves[1])];
        let (accepted, report) = mitigate(ups, &plan, &reg, false);
        assert_eq!(accepted.len(), 1);
        assert_eq!(accepted[0].device_id, 1);
        assert_eq!(report.excluded, vec![(0, ExclusionReason::StructureMismatch)]);
        assert_eq!(report.included_per_slave, vec![0, 1]);
        assert_eq!(report.epoch, 3);
    }

    #[test]
    fn well_shaped_poison_passes() {
        let reg = registry();
        let plan = AssignmentPlan::new(0, vec![1]);
        // poisoned values but the right structure: mitigation is structural only
        let mut up = upload(0, &reg.slaves[1]);
        up.declared.params.iter_mut().for_each(|p| *p = 99.0);
        let (accepted, report) = mitigate(vec![up], &plan, &reg, false);
        assert_eq!(accepted.len(), 1);
        assert!(report.excluded.is_empty());
    }

    #[test]
    fn unplanned_device_excluded() {
        let reg = registry();
        let plan = AssignmentPlan::new(0, vec![0]);
        let (accepted, report) = mitigate(vec![upload(7, &reg.slaves[0])], &plan, &reg, false);
        assert!(accepted.is_empty());
        assert_eq!(report.excluded, vec![(7, ExclusionReason::UnplannedDevice)]);
    }

    #[test]
    fn empty_upload_set() {
        let reg = registry();
        let plan = AssignmentPlan::new(0, vec![0]);
        let (accepted, report) = mitigate(vec![], &plan, &reg, false);
        assert!(accepted.is_empty());
        assert!(report.excluded.is_empty());
        assert_eq!(report.accepted_count(), 0);
    }

    #[test]
    fn signature_check_catches_count_collisions() {
        // two different shapes with an equal parameter count
        let a = ModelSpec::dense("a", 3, 2, 1); // 3*2+2twice.. 6+2+2+1 = 11
        let b = ModelSpec::dense("b", 4, 0, 1); // hand-built collision below
        let reg = ModelRegistry::with_master_in_slaves(vec![a.clone()], "a").unwrap();
        let plan = AssignmentPlan::new(0, vec![0]);

        let mut shaped = ModelWeights::zeros(&b);
        shaped.params = vec![0.0; a.param_count()]; // force equal count
        let up = Upload { device_id: 0, declared: shaped, batch_size: 1 };

        let (acc_default, _) = mitigate(vec![up.clone()], &plan, &reg, false);
        assert_eq!(acc_default.len(), 1);
        let (acc_sig, rep) = mitigate(vec![up], &plan, &reg, true);
        assert!(acc_sig.is_empty());
        assert_eq!(rep.excluded.len(), 1);
    }
}
