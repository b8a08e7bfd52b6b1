//! Experiment orchestration: configuration, scenario presets, the
//! episode/epoch driver, metrics persistence, and scenario comparison.

mod compare;
mod config;
mod metrics;
mod scenario;

pub use compare::{check_orderings, compare_series, CompareSummary, ExpectedOrdering, ScenarioSeries};
pub use config::{
    ComputeConfig, DataConfig, DataSource, ExperimentConfig, FlConfig, MobilityConfig,
    ModelsConfig, NetworkConfig, SelectorKind, SelectorSection,
};
pub use metrics::{emit_metrics, load_series};
pub use scenario::{run_scenario, RepetitionRecord, RunRecord, Scenario};
