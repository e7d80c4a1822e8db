use std::io::Write;

use ndarray::{Array2, ArrayView2};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::config::{DataSpec, ExperimentConfig, Regime};
use super::data::{generate_blobs, Dataset};
use crate::error::{Error, Result};
use crate::io::load_cloud_csv;
use crate::model::{adam_step, backward_combined, AdamState, Mlp, WarmupSchedule};
use crate::numeric::anisotropy_profile;

/// Anisotropy is tracked for `k = 1..=TRACKED_K`.
pub const TRACKED_K: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord {
    pub step: usize,
    pub epoch: usize,
    pub lr: f64,
    pub ce: f64,
    pub ent: f64,
    pub total: f64,
    pub val_accuracy: f64,
    pub anisotropy: Vec<f64>,
    pub anisotropy_centered: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Divergence {
    pub step: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMetrics {
    pub seed: u64,
    pub regime: Regime,
    pub records: Vec<StepRecord>,
    pub diverged: Option<Divergence>,
}

impl RunMetrics {
    /// One JSON line per step, plus a trailing `{"diverged": ...}` line when
    /// the run was aborted.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        for r in &self.records {
            crate::json::to_writer(&mut w, r)?;
            w.write_all(b"\n")?;
        }
        if let Some(d) = &self.diverged {
            crate::json::to_writer(&mut w, &serde_json::json!({ "diverged": d }))?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub metrics: RunMetrics,
    pub model: Mlp,
}

pub fn load_dataset(cfg: &ExperimentConfig, seed: u64) -> Result<Dataset> {
    match &cfg.data {
        DataSpec::Blobs(spec) => generate_blobs(seed, spec),
        DataSpec::Csv { path } => {
            let file = load_cloud_csv(path)?;
            let labels = file.labels.ok_or_else(|| Error::Config {
                path: "data.csv.path".into(),
                message: "training data needs a `label` column".into(),
            })?;
            Dataset::split(file.cloud, labels, seed)
        }
    }
}

fn accuracy(mlp: &Mlp, x: ArrayView2<'_, f64>, y: &[usize]) -> Result<f64> {
    let cache = mlp.forward(x)?;
    let correct = cache
        .logits()
        .outer_iter()
        .zip(y)
        .filter(|(row, &label)| {
            let mut best = 0;
            for j in 1..row.len() {
                if row[j] > row[best] {
                    best = j;
                }
            }
            best == label
        })
        .count();
    Ok(correct as f64 / y.len() as f64)
}

struct Evaluator {
    eval_x: Array2<f64>,
    val_x: Array2<f64>,
    val_y: Vec<usize>,
}

impl Evaluator {
    fn new(data: &Dataset, eval_batch: usize) -> Self {
        let eval_idx = &data.val[..eval_batch.min(data.val.len())];
        Self {
            eval_x: data.rows(eval_idx),
            val_x: data.rows(&data.val),
            val_y: data.labels_of(&data.val),
        }
    }

    fn anisotropy(&self, mlp: &Mlp) -> Result<(Vec<f64>, Vec<f64>)> {
        let cache = mlp.forward(self.eval_x.view())?;
        let reps = cache.representations().view();
        let raw = anisotropy_profile(reps, TRACKED_K, false)?.scores;
        let centered = anisotropy_profile(reps, TRACKED_K, true)?.scores;
        Ok((raw, centered))
    }
}

/// Trains one model under `cfg` with everything random derived from `seed`.
/// Non-finite losses or parameters stop the run and are reported in
/// [`RunMetrics::diverged`] rather than as an error.
pub fn run_seed(cfg: &ExperimentConfig, seed: u64) -> Result<RunOutcome> {
    cfg.validate()?;
    let data = load_dataset(cfg, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);

    let mut dims = vec![data.dim()];
    dims.extend(&cfg.model.hidden);
    dims.push(data.n_classes);
    let mut mlp = Mlp::init(&dims, cfg.model.rep_layer, &mut rng)?;

    let eval = Evaluator::new(&data, cfg.eval_batch);
    let steps_per_epoch = data.train.len().div_ceil(cfg.batch_size);
    let total_steps = steps_per_epoch * cfg.epochs;
    let sched = WarmupSchedule::new(cfg.base_lr, total_steps as u64);
    let mut adam = AdamState::new(&mlp.tensors());
    let mode = cfg.regime.selection_mode();

    let mut metrics = RunMetrics {
        seed,
        regime: cfg.regime,
        records: Vec::with_capacity(total_steps),
        diverged: None,
    };
    let mut order = data.train.clone();
    let mut step = 0;
    'train: for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for batch_idx in order.chunks(cfg.batch_size) {
            let x = data.rows(batch_idx);
            let y = data.labels_of(batch_idx);
            let (obj, grads) = backward_combined(&mlp, x.view(), &y, mode, cfg.lambda)?;
            if !obj.total.is_finite() {
                metrics.diverged = Some(Divergence {
                    step,
                    reason: format!("non-finite objective {obj:?}"),
                });
                break 'train;
            }
            let lr = adam_step(
                &mut mlp.tensors_mut(),
                &grads.tensors(),
                &mut adam,
                &sched,
                cfg.weight_decay,
            )?;
            if !mlp.is_finite() {
                metrics.diverged = Some(Divergence {
                    step,
                    reason: "non-finite parameters after update".into(),
                });
                break 'train;
            }
            let (anisotropy, anisotropy_centered) = eval.anisotropy(&mlp)?;
            metrics.records.push(StepRecord {
                step,
                epoch,
                lr,
                ce: obj.ce,
                ent: obj.ent,
                total: obj.total,
                val_accuracy: accuracy(&mlp, eval.val_x.view(), &eval.val_y)?,
                anisotropy,
                anisotropy_centered,
            });
            step += 1;
        }
    }
    Ok(RunOutcome {
        metrics,
        model: mlp,
    })
}

/// Runs every seed in `cfg.seeds` in parallel; results keep seed order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<RunOutcome>> {
    cfg.validate()?;
    cfg.seeds.par_iter().map(|&s| run_seed(cfg, s)).collect()
}
