//! Small feedforward classifier trained on cross-entropy minus a weighted
//! per-class persistent-entropy term computed on a hidden representation.

mod mlp;
mod optim;

pub use mlp::{
    softmax_cross_entropy, Checkpoint, ForwardCache, Gradients, Layer, LayerRecord, Mlp,
};
pub use optim::{adam_step, AdamState, WarmupSchedule};

use ndarray::ArrayView2;
use serde::Serialize;

use crate::error::Result;
use crate::numeric::PointCloud;
use crate::regularizer::{per_class_entropy_loss, ClassPartition, SelectionMode};

/// `total = ce - lambda * ent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ObjectiveBreakdown {
    pub ce: f64,
    pub ent: f64,
    pub total: f64,
}

/// Value and parameter gradients of the combined objective on one batch.
///
/// `mode = None` disables the entropy term entirely; the persistence code is
/// not touched. Otherwise the summed per-class entropy of the representation
/// layer enters with weight `-lambda`.
pub fn backward_combined(
    mlp: &Mlp,
    batch: ArrayView2<'_, f64>,
    labels: &[usize],
    mode: Option<SelectionMode>,
    lambda: f64,
) -> Result<(ObjectiveBreakdown, Gradients)> {
    let cache = mlp.forward(batch)?;
    let (ce, d_logits) = softmax_cross_entropy(cache.logits(), labels)?;

    let (ent, d_rep) = match mode {
        None => (0.0, None),
        Some(mode) => {
            let reps = PointCloud::new(cache.representations().clone())?;
            let part = ClassPartition::new(labels.to_vec());
            let loss = per_class_entropy_loss(&reps, &part, mode)?;
            (loss.value, Some(loss.grad * -lambda))
        }
    };

    let grads = mlp.backward(&cache, &d_logits, d_rep.as_ref());
    let breakdown = ObjectiveBreakdown {
        ce,
        ent,
        total: ce - lambda * ent,
    };
    Ok((breakdown, grads))
}

/// Scalar objective only, for finite-difference checks.
pub fn objective_value(
    mlp: &Mlp,
    batch: ArrayView2<'_, f64>,
    labels: &[usize],
    mode: Option<SelectionMode>,
    lambda: f64,
) -> Result<ObjectiveBreakdown> {
    let cache = mlp.forward(batch)?;
    let (ce, _) = softmax_cross_entropy(cache.logits(), labels)?;
    let ent = match mode {
        None => 0.0,
        Some(mode) => {
            let reps = PointCloud::new(cache.representations().clone())?;
            per_class_entropy_loss(&reps, &ClassPartition::new(labels.to_vec()), mode)?.value
        }
    };
    Ok(ObjectiveBreakdown {
        ce,
        ent,
        total: ce - lambda * ent,
    })
}
