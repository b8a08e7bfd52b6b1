//! Cross-scenario comparison: per-epoch deltas and declared-ordering
//! checks over emitted runs.

use serde::{Deserialize, Serialize};

use super::scenario::RunRecord;
use crate::error::{Error, Result};

/// The per-epoch series one run contributes to a comparison.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioSeries {
    pub scenario: String,
    pub accuracy: Vec<f64>,
    pub mean_t_int: Vec<f64>,
}

impl From<&RunRecord> for ScenarioSeries {
    fn from(r: &RunRecord) -> Self {
        Self {
            scenario: r.scenario.clone(),
            accuracy: r.mean_accuracy(),
            mean_t_int: r.mean_recognition(),
        }
    }
}

/// A declared expectation: scenario names ordered from highest to lowest
/// value of `metric` at epoch `at` ("final" or an index), with an
/// optional minimum gap between neighbours.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExpectedOrdering {
    pub metric: String,
    pub at: String,
    pub ordering: Vec<String>,
    #[serde(default)]
    pub min_gap: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompareSummary {
    pub epochs: usize,
    pub scenarios: Vec<String>,
    /// Pairwise per-epoch accuracy deltas between consecutive inputs
    /// (first minus second).
    pub accuracy_deltas: Vec<(String, String, Vec<f64>)>,
    pub violations: Vec<String>,
}

fn metric_of<'a>(s: &'a ScenarioSeries, metric: &str) -> Result<&'a [f64]> {
    match metric {
        "accuracy" => Ok(&s.accuracy),
        "mean_t_int" => Ok(&s.mean_t_int),
        other => Err(Error::Config(format!("unknown metric {other}"))),
    }
}

/// Check every declared ordering against the series; returns the
/// violations found.
pub fn check_orderings(series: &[ScenarioSeries], expects: &[ExpectedOrdering]) -> Result<Vec<String>> {
    let mut violations = Vec::new();
    for expect in expects {
        let mut values = Vec::with_capacity(expect.ordering.len());
        for name in &expect.ordering {
            let s = series
                .iter()
                .find(|s| &s.scenario == name)
                .ok_or_else(|| Error::Config(format!("no run for scenario {name}")))?;
            let m = metric_of(s, &expect.metric)?;
            if m.is_empty() {
                return Err(Error::Config(format!("scenario {name} has no epochs")));
            }
            let idx = if expect.at == "final" {
                m.len() - 1
            } else {
                expect
                    .at
                    .parse::<usize>()
                    .map_err(|_| Error::Config(format!("bad epoch selector {}", expect.at)))?
            };
            let v = *m
                .get(idx)
                .ok_or_else(|| Error::Config(format!("scenario {name} lacks epoch {idx}")))?;
            values.push((name.clone(), v));
        }
        for pair in values.windows(2) {
            let (ref a, va) = pair[0];
            let (ref b, vb) = pair[1];
            if va < vb + expect.min_gap {
                violations.push(format!(
                    "{} at {}: expected {a} ({va}) >= {b} ({vb}) + {}",
                    expect.metric, expect.at, expect.min_gap
                ));
            }
        }
    }
    Ok(violations)
}

/// Align at least two series on their shared epochs, compute pairwise
/// deltas, and evaluate the declared orderings.
pub fn compare_series(series: &[ScenarioSeries], expects: &[ExpectedOrdering]) -> Result<CompareSummary> {
    if series.len() < 2 {
        return Err(Error::Config("comparison needs at least two runs".into()));
    }
    let epochs = series[0].accuracy.len();
    for s in series {
        if s.accuracy.len() != epochs {
            return Err(Error::Config(format!(
                "epoch mismatch: {} has {} epochs, {} has {}",
                series[0].scenario,
                epochs,
                s.scenario,
                s.accuracy.len()
            )));
        }
    }
    let mut accuracy_deltas = Vec::new();
    for pair in series.windows(2) {
        let delta: Vec<f64> = pair[0]
            .accuracy
            .iter()
            .zip(&pair[1].accuracy)
            .map(|(a, b)| a - b)
            .collect();
        accuracy_deltas.push((pair[0].scenario.clone(), pair[1].scenario.clone(), delta));
    }
    let violations = check_orderings(series, expects)?;
    Ok(CompareSummary {
        epochs,
        scenarios: series.iter().map(|s| s.scenario.clone()).collect(),
        accuracy_deltas,
        violations,
    })
}
