//! Metrics persistence: one directory per run with stable CSV schemas
//! and a resolved-run manifest.
//!
//! Files: reward.csv (episode, cumulative_reward), accuracy.csv (epoch,
//! scenario, accuracy), timing.csv (epoch, scenario, mean_t_int),
//! metrics.csv (full per-epoch summary), mitigation.csv (exclusion
//! audit), run.json (resolved config, seeds, betas). Only run.json
//! carries a timestamp; the CSVs are byte-stable across identical runs.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use super::compare::ScenarioSeries;
use super::scenario::RunRecord;
use crate::error::{Error, Result};

pub fn emit_metrics(record: &RunRecord, out_dir: &Path) -> Result<()> {
    fs::create_dir_all(out_dir)?;

    let mut reward = String::from("episode,cumulative_reward\n");
    for (ep, r) in record.mean_episode_rewards().iter().enumerate() {
        reward.push_str(&format!("{ep},{r}\n"));
    }
    write_file(out_dir, "reward.csv", &reward)?;

    let accuracy_series = record.mean_accuracy();
    let mut accuracy = String::from("epoch,scenario,accuracy\n");
    for (ep, a) in accuracy_series.iter().enumerate() {
        accuracy.push_str(&format!("{ep},{},{a}\n", record.scenario));
    }
    write_file(out_dir, "accuracy.csv", &accuracy)?;

    let mut timing = String::from("epoch,scenario,mean_t_int\n");
    for (ep, t) in record.mean_recognition().iter().enumerate() {
        timing.push_str(&format!("{ep},{},{t}\n", record.scenario));
    }
    write_file(out_dir, "timing.csv", &timing)?;

    // full per-epoch summary across the final episode, averaged over reps
    let losses = record.mean_global_loss();
    let mut metrics = String::from("epoch,scenario,loss,accuracy,mean_t_int,max_t_int,excluded\n");
    let epochs = record.reps.iter().map(|r| r.final_metrics.len()).min().unwrap_or(0);
    for ep in 0..epochs {
        let mean = |f: &dyn Fn(&crate::protocol::EpochMetrics) -> f64| -> f64 {
            record.reps.iter().map(|r| f(&r.final_metrics[ep])).sum::<f64>() / record.reps.len() as f64
        };
        let max_t = mean(&|m| m.timing.max_recognition());
        let mean_t = mean(&|m| m.timing.mean_recognition());
        let excluded = mean(&|m| m.excluded as f64);
        metrics.push_str(&format!(
            "{ep},{},{},{},{mean_t},{max_t},{excluded}\n",
            record.scenario,
            losses.get(ep).copied().unwrap_or(f64::NAN),
            accuracy_series.get(ep).copied().unwrap_or(f64::NAN),
        ));
    }
    write_file(out_dir, "metrics.csv", &metrics)?;

    let mut mitigation = String::from("rep,epoch,device,reason\n");
    for (rep_idx, rep) in record.reps.iter().enumerate() {
        for report in &rep.final_reports {
            for (device, reason) in &report.excluded {
                mitigation.push_str(&format!("{rep_idx},{},{device},{reason}\n", report.epoch));
            }
        }
    }
    write_file(out_dir, "mitigation.csv", &mitigation)?;

    let mut attack = String::from("rep,episode,devices,lambdas\n");
    for (rep_idx, rep) in record.reps.iter().enumerate() {
        for set in &rep.attack_log {
            let devices: Vec<String> = set.devices.iter().map(|d| d.to_string()).collect();
            let lambdas: Vec<String> = set.lambdas.iter().map(|l| format!("{l:.4}")).collect();
            attack.push_str(&format!(
                "{rep_idx},{},{},{}\n",
                set.episode,
                devices.join(";"),
                lambdas.join(";")
            ));
        }
    }
    write_file(out_dir, "attack.csv", &attack)?;

    let manifest = serde_json::json!({
        "scenario": record.scenario,
        "master_seed": record.master_seed,
        "repetition_seeds": record.reps.iter().map(|r| r.seed).collect::<Vec<_>>(),
        "betas": record.reps.iter().map(|r| r.beta).collect::<Vec<_>>(),
        "config": record.config,
        "generated_at_unix": SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
    });
    write_file(out_dir, "run.json", &serde_json::to_string_pretty(&manifest)?)?;
    Ok(())
}

fn write_file(dir: &Path, name: &str, content: &str) -> Result<()> {
    let mut f = fs::File::create(dir.join(name))?;
    f.write_all(content.as_bytes())?;
    Ok(())
}

/// Load the per-epoch series a run directory holds, for comparison.
pub fn load_series(dir: &Path) -> Result<ScenarioSeries> {
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("run.json"))?)?;
    let scenario = manifest
        .get("scenario")
        .and_then(|s| s.as_str())
        .ok_or_else(|| Error::Config("run.json lacks a scenario name".into()))?
        .to_string();

    let parse = |name: &str, col: usize| -> Result<Vec<f64>> {
        let text = fs::read_to_string(dir.join(name))?;
        text.lines()
            .skip(1)
            .map(|line| {
                line.split(',')
                    .nth(col)
                    .ok_or_else(|| Error::Config(format!("{name}: short row")))?
                    .parse::<f64>()
                    .map_err(|e| Error::Config(format!("{name}: {e}")))
            })
            .collect()
    };
    Ok(ScenarioSeries {
        scenario,
        accuracy: parse("accuracy.csv", 2)?,
        mean_t_int: parse("timing.csv", 2)?,
    })
}
