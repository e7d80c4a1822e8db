//! Trains every regime on one config and prints the last-30% summaries.
//!
//!     cargo run --release --example regime_sweep -- '{"epochs": 20}'

use persreg_core::harness::{
    run_experiment, summarize, tail_means, ExperimentConfig, Regime, RunMetrics,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut cfg = match std::env::args().nth(1) {
        Some(text) => ExperimentConfig::from_json(&text)?,
        None => ExperimentConfig::default(),
    };
    for regime in Regime::ALL {
        cfg.regime = regime;
        let runs: Vec<RunMetrics> = run_experiment(&cfg)?
            .into_iter()
            .map(|r| r.metrics)
            .collect();
        let summary = summarize(&runs)?;
        let per_seed = runs
            .iter()
            .map(|r| Ok(format!("{:.3}", tail_means(r)?["anisotropy_centered_1"])))
            .collect::<persreg_core::Result<Vec<_>>>()?;
        let m = &summary.metrics;
        println!(
            "{regime:>14}  ani_c1 {}  acc {}  ent {}  per-seed ani_c1 [{}]",
            m["anisotropy_centered_1"].display,
            m["val_accuracy"].display,
            m["ent"].display,
            per_seed.join(", ")
        );
    }
    Ok(())
}
