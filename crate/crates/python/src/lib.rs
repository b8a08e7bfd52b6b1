//! Python bindings: the detection model, the synthetic data generator,
//! and the scenario runner, driven in-process from Python.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use mmfl_core::data::{
    evaluate_accuracy as core_accuracy, flow_verdict as core_verdict, generate_synthetic, Flow,
    PacketRecord, SyntheticParams,
};
use mmfl_core::experiment::{emit_metrics, run_scenario, ExperimentConfig, Scenario};
use mmfl_core::nn::{
    self, forward, forward_steps, init_model, softmax_head, CellKind, LabeledBatch, ModelSpec,
    ModelWeights,
};
use mmfl_core::rng::stream;
use mmfl_core::Error;

fn py_err(err: Error) -> PyErr {
    match err {
        Error::Config(_) | Error::InvalidSpec(_) | Error::DimensionMismatch { .. } => {
            PyValueError::new_err(err.to_string())
        }
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn parse_cell(cell: &str) -> PyResult<CellKind> {
    match cell {
        "gru" | "recurrent-gated" => Ok(CellKind::RecurrentGated),
        "dense" | "dense-only" => Ok(CellKind::DenseOnly),
        other => Err(PyValueError::new_err(format!(
            "unknown cell kind {other}; expected gru or dense"
        ))),
    }
}

/// A detection or policy model: architecture plus its flat weights.
#[pyclass]
struct Model {
    weights: ModelWeights,
}

#[pymethods]
impl Model {
    /// Build and initialize a model.
    ///
    /// Args:
    ///     model_id: identifier (not part of the structure).
    ///     input_dim: feature count per packet.
    ///     cell: "gru" or "dense".
    ///     hidden_dim: hidden units (0 allowed for dense).
    ///     output_dim: 1 for detection, l for policy heads.
    ///     seed: init seed.
    #[new]
    #[pyo3(signature = (model_id, input_dim, cell="gru", hidden_dim=8, output_dim=1, seed=0))]
    fn new(
        model_id: &str,
        input_dim: usize,
        cell: &str,
        hidden_dim: usize,
        output_dim: usize,
        seed: u64,
    ) -> PyResult<Self> {
        let spec = ModelSpec {
            model_id: model_id.to_string(),
            input_dim,
            cell: parse_cell(cell)?,
            hidden_dim,
            output_dim,
        };
        let weights = init_model(&spec, &mut stream(seed, "py-init")).map_err(py_err)?;
        Ok(Self { weights })
    }

    fn param_count(&self) -> usize {
        self.weights.param_count()
    }

    /// Probability that the sequence is malicious (final step).
    fn forward(&self, sequence: Vec<Vec<f64>>) -> PyResult<f64> {
        forward(&self.weights, &sequence).map_err(py_err)
    }

    /// Per-packet probabilities along the sequence.
    fn forward_steps(&self, sequence: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
        forward_steps(&self.weights, &sequence).map_err(py_err)
    }

    /// Softmax distribution over the output heads for one feature vector.
    fn softmax(&self, input: Vec<f64>) -> PyResult<Vec<f64>> {
        softmax_head(&self.weights, &input).map_err(py_err)
    }

    /// Mean binary cross-entropy over (sequences, binary labels).
    fn loss(&self, sequences: Vec<Vec<Vec<f64>>>, labels: Vec<f64>) -> PyResult<f64> {
        let batch = LabeledBatch::new(sequences, labels).map_err(py_err)?;
        nn::loss(&self.weights, &batch).map_err(py_err)
    }

    /// K full-batch gradient-descent steps in place; returns the final loss.
    fn train(
        &mut self,
        sequences: Vec<Vec<Vec<f64>>>,
        labels: Vec<f64>,
        lr: f64,
        iters: usize,
    ) -> PyResult<f64> {
        let batch = LabeledBatch::new(sequences, labels).map_err(py_err)?;
        self.weights = nn::train_local(&self.weights, &batch, lr, iters).map_err(py_err)?;
        nn::loss(&self.weights, &batch).map_err(py_err)
    }

    /// Flat parameter vector.
    fn params(&self) -> Vec<f64> {
        self.weights.params.clone()
    }

    fn set_params(&mut self, params: Vec<f64>) -> PyResult<()> {
        if params.len() != self.weights.param_count() {
            return Err(PyValueError::new_err(format!(
                "expected {} parameters, got {}",
                self.weights.param_count(),
                params.len()
            )));
        }
        self.weights.params = params;
        Ok(())
    }

    /// Text export with the shape-map header.
    fn export_text(&self) -> String {
        self.weights.export_text()
    }

    /// Detection accuracy over flows shaped as (features, packet_labels, flow_label).
    fn accuracy(&self, flows: Vec<(Vec<Vec<f64>>, Vec<u8>, u8)>) -> PyResult<f64> {
        let flows: Vec<Flow> = flows
            .into_iter()
            .map(|(features, labels, flow_label)| Flow {
                packets: features
                    .into_iter()
                    .zip(labels)
                    .map(|(f, l)| PacketRecord { features: f, label: l })
                    .collect(),
                label: flow_label,
            })
            .collect();
        core_accuracy(&self.weights, &flows).map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "Model(id={}, params={}, input={}, hidden={}, output={})",
            self.weights.spec.model_id,
            self.weights.param_count(),
            self.weights.spec.input_dim,
            self.weights.spec.hidden_dim,
            self.weights.spec.output_dim,
        )
    }
}

/// Generate seeded synthetic flows; returns (features, packet_labels,
/// flow_label) triples with min-max normalized features.
#[pyfunction]
#[pyo3(signature = (seed, features, flows, class_sep=3.0, malicious_fraction=0.5))]
fn generate_flows(
    seed: u64,
    features: usize,
    flows: usize,
    class_sep: f64,
    malicious_fraction: f64,
) -> Vec<(Vec<Vec<f64>>, Vec<u8>, u8)> {
    let params = SyntheticParams { features, flows, class_sep, malicious_fraction };
    generate_synthetic(&mut stream(seed, "py-data"), &params)
        .into_iter()
        .map(|f| {
            let feats = f.feature_sequence();
            let labels = f.packets.iter().map(|p| p.label).collect();
            (feats, labels, f.label)
        })
        .collect()
}

/// Flow verdict from per-packet probabilities.
#[pyfunction]
#[pyo3(signature = (packet_probs, packet_threshold=0.5, ratio_threshold=0.7))]
fn flow_verdict(packet_probs: Vec<f64>, packet_threshold: f64, ratio_threshold: f64) -> u8 {
    core_verdict(&packet_probs, packet_threshold, ratio_threshold)
}

/// The built-in desk-scale configuration as a JSON string.
#[pyfunction]
fn default_config() -> PyResult<String> {
    serde_json::to_string_pretty(&ExperimentConfig::desk_default())
        .map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

/// Validate a configuration JSON document.
#[pyfunction]
fn validate_config(config_json: &str) -> PyResult<()> {
    let cfg: ExperimentConfig =
        serde_json::from_str(config_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
    cfg.validate().map_err(py_err)
}

/// Run one scenario; writes the metrics directory and returns a JSON
/// summary (final accuracy, rewards, recognition times).
#[pyfunction]
#[pyo3(signature = (config_json, scenario, out_dir, seed=None))]
fn run(config_json: &str, scenario: &str, out_dir: &str, seed: Option<u64>) -> PyResult<String> {
    let mut cfg: ExperimentConfig =
        serde_json::from_str(config_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    let scenario = Scenario::parse(scenario).map_err(py_err)?;
    cfg.validate().map_err(py_err)?;
    let record = run_scenario(&cfg, scenario).map_err(py_err)?;
    emit_metrics(&record, std::path::Path::new(out_dir)).map_err(py_err)?;
    let summary = serde_json::json!({
        "scenario": record.scenario,
        "repetitions": record.reps.len(),
        "accuracy": record.mean_accuracy(),
        "mean_t_int": record.mean_recognition(),
        "episode_rewards": record.mean_episode_rewards(),
    });
    serde_json::to_string(&summary).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

#[pymodule]
fn mmfl_python(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<Model>()?;
    m.add_function(wrap_pyfunction!(generate_flows, m)?)?;
    m.add_function(wrap_pyfunction!(flow_verdict, m)?)?;
    m.add_function(wrap_pyfunction!(default_config, m)?)?;
    m.add_function(wrap_pyfunction!(validate_config, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    Ok(())
}
