//! The multi-model FL epoch: plan validation, structural mismatch
//! mitigation, per-slave partial aggregation, knowledge transfer into
//! the master, cloud aggregation, and selective broadcast.

mod aggregate;
mod epoch;
mod knowledge;
mod mitigate;
mod plan;

pub use aggregate::{cloud_aggregate, partial_aggregate};
pub use epoch::{run_epoch, AdversaryHook, DeviceState, EpochMetrics, FlParams, WorldState};
pub use knowledge::knowledge_transfer;
pub use mitigate::{mitigate, ExclusionReason, MitigationReport};
pub use plan::{master_quota, validate_plan, PlanViolation};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{ModelSpec, ModelWeights};

/// The slave model catalogue and the master architecture. When the
/// master belongs to the slave set, `master_index` points at it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelRegistry {
    pub slaves: Vec<ModelSpec>,
    pub master: ModelSpec,
    pub master_index: Option<usize>,
}

impl ModelRegistry {
    /// Master chosen from the slave set by id.
    pub fn with_master_in_slaves(slaves: Vec<ModelSpec>, master_id: &str) -> Result<Self> {
        let idx = slaves
            .iter()
            .position(|s| s.model_id == master_id)
            .ok_or_else(|| Error::Config(format!("master id {master_id} not among slave specs")))?;
        let master = slaves[idx].clone();
        let reg = Self { slaves, master, master_index: Some(idx) };
        reg.validate()?;
        Ok(reg)
    }

    /// Master trained only through knowledge transfer, outside the slave set.
    pub fn with_external_master(slaves: Vec<ModelSpec>, master: ModelSpec) -> Result<Self> {
        let reg = Self { slaves, master, master_index: None };
        reg.validate()?;
        Ok(reg)
    }

    fn validate(&self) -> Result<()> {
        if self.slaves.is_empty() {
            return Err(Error::Config("at least one slave model is required".into()));
        }
        self.master.validate()?;
        for s in &self.slaves {
            s.validate()?;
            if s.input_dim != self.master.input_dim {
                return Err(Error::Config(format!(
                    "slave {} input_dim {} differs from master input_dim {}",
                    s.model_id, s.input_dim, self.master.input_dim
                )));
            }
            if s.output_dim != 1 || self.master.output_dim != 1 {
                return Err(Error::Config("detection models need a scalar head".into()));
            }
        }
        if let Some(idx) = self.master_index {
            if !self.slaves[idx].structurally_eq(&self.master) {
                return Err(Error::Config("master_index does not match the master spec".into()));
            }
        }
        Ok(())
    }

    pub fn num_slaves(&self) -> usize {
        self.slaves.len()
    }

    pub fn is_master_slot(&self, j: usize) -> bool {
        self.master_index == Some(j)
    }
}

/// Per-epoch device-to-slave assignment. The vector form assigns exactly
/// one model per device; validation reports devices the plan misses.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssignmentPlan {
    pub epoch: usize,
    pub assignment: Vec<usize>,
}

impl AssignmentPlan {
    pub fn new(epoch: usize, assignment: Vec<usize>) -> Self {
        Self { epoch, assignment }
    }

    pub fn num_devices(&self) -> usize {
        self.assignment.len()
    }

    /// Devices planned on the master model.
    pub fn master_count(&self, registry: &ModelRegistry) -> usize {
        match registry.master_index {
            Some(mj) => self.assignment.iter().filter(|&&j| j == mj).count(),
            None => 0,
        }
    }
}

/// One device's upload: its declared weights and local batch size.
#[derive(Debug, Clone)]
pub struct Upload {
    pub device_id: usize,
    pub declared: ModelWeights,
    pub batch_size: usize,
}

/// A base station's replicas and unlabeled edge data.
#[derive(Debug, Clone)]
pub struct EdgeState {
    pub bs_id: usize,
    pub slaves: Vec<ModelWeights>,
    pub master: ModelWeights,
    pub edge_data: Vec<Vec<Vec<f64>>>,
}

impl EdgeState {
    /// All stations start from the same initial replicas.
    pub fn new(
        bs_id: usize,
        registry: &ModelRegistry,
        slave_weights: Vec<ModelWeights>,
        master_weights: ModelWeights,
        edge_data: Vec<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        if slave_weights.len() != registry.num_slaves() {
            return Err(Error::Config("one weight set per slave spec required".into()));
        }
        for (w, s) in slave_weights.iter().zip(&registry.slaves) {
            if !w.spec.structurally_eq(s) {
                return Err(Error::StructuralMismatch(format!(
                    "slave replica {} does not match spec {}",
                    w.spec.model_id, s.model_id
                )));
            }
        }
        if !master_weights.spec.structurally_eq(&registry.master) {
            return Err(Error::StructuralMismatch("master replica mismatch".into()));
        }
        Ok(Self { bs_id, slaves: slave_weights, master: master_weights, edge_data })
    }
}
