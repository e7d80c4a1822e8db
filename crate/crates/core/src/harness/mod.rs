//! Multi-seed training experiments comparing the three regularization
//! regimes, with per-step anisotropy tracking and last-30% summaries.

mod config;
mod data;
mod run;
mod summary;

pub use config::{BlobSpec, DataSpec, ExperimentConfig, ModelSpec, Regime};
pub use data::{generate_blobs, Dataset};
pub use run::{
    load_dataset, run_experiment, run_seed, Divergence, RunMetrics, RunOutcome, StepRecord,
    TRACKED_K,
};
pub use summary::{summarize, tail_means, tail_start, MetricSummary, Summary};
