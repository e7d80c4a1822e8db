use std::collections::BTreeMap;

use serde::Serialize;

use super::run::{RunMetrics, StepRecord};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricSummary {
    pub mean: f64,
    /// Population standard deviation over runs.
    pub std: f64,
    /// `mean ± std` to three decimals.
    pub display: String,
}

impl MetricSummary {
    pub fn from_values(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let std = var.max(0.0).sqrt();
        Self {
            mean,
            std,
            display: format!("{mean:.3} ± {std:.3}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub seeds: Vec<u64>,
    pub metrics: BTreeMap<String, MetricSummary>,
}

/// Index of the first step counted as "converged": the last 30% of steps,
/// but never fewer than one.
pub fn tail_start(n_steps: usize) -> usize {
    (7 * n_steps).div_ceil(10).min(n_steps.saturating_sub(1))
}

fn named_metrics(r: &StepRecord) -> Vec<(String, f64)> {
    let mut out = vec![
        ("ce".to_string(), r.ce),
        ("ent".to_string(), r.ent),
        ("total".to_string(), r.total),
        ("val_accuracy".to_string(), r.val_accuracy),
    ];
    for (k, v) in r.anisotropy.iter().enumerate() {
        out.push((format!("anisotropy_{}", k + 1), *v));
    }
    for (k, v) in r.anisotropy_centered.iter().enumerate() {
        out.push((format!("anisotropy_centered_{}", k + 1), *v));
    }
    out
}

/// Mean of every metric over the last 30% of a run's steps.
pub fn tail_means(run: &RunMetrics) -> Result<BTreeMap<String, f64>> {
    let n = run.records.len();
    if n == 0 {
        return Err(Error::EmptyInput("run has no records"));
    }
    let tail = &run.records[tail_start(n)..];
    let mut sums: BTreeMap<String, f64> = BTreeMap::new();
    for r in tail {
        for (name, v) in named_metrics(r) {
            *sums.entry(name).or_insert(0.0) += v;
        }
    }
    Ok(sums
        .into_iter()
        .map(|(k, s)| (k, s / tail.len() as f64))
        .collect())
}

/// Mean and population standard deviation across runs of each metric's
/// last-30% average.
pub fn summarize(runs: &[RunMetrics]) -> Result<Summary> {
    if runs.is_empty() {
        return Err(Error::EmptyInput("no runs to summarize"));
    }
    let per_run = runs.iter().map(tail_means).collect::<Result<Vec<_>>>()?;
    let mut metrics = BTreeMap::new();
    for name in per_run[0].keys() {
        let values: Vec<f64> = per_run
            .iter()
            .filter_map(|m| m.get(name).copied())
            .collect();
        metrics.insert(name.clone(), MetricSummary::from_values(&values));
    }
    Ok(Summary {
        seeds: runs.iter().map(|r| r.seed).collect(),
        metrics,
    })
}
