use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::regularizer::SelectionMode;

/// Training condition: no regularizer, entropy of selected bars, or entropy
/// of all bars.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    None,
    #[serde(alias = "selected")]
    SelectedBars,
    #[serde(alias = "all")]
    AllBars,
}

impl Regime {
    pub const ALL: [Regime; 3] = [Regime::None, Regime::SelectedBars, Regime::AllBars];

    pub fn selection_mode(self) -> Option<SelectionMode> {
        match self {
            Regime::None => None,
            Regime::SelectedBars => Some(SelectionMode::SelectedBars),
            Regime::AllBars => Some(SelectionMode::AllBars),
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::None => "none",
            Regime::SelectedBars => "selected_bars",
            Regime::AllBars => "all_bars",
        })
    }
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Regime::None),
            "selected" | "selected_bars" => Ok(Regime::SelectedBars),
            "all" | "all_bars" => Ok(Regime::AllBars),
            other => Err(Error::InvalidParameter(format!("unknown regime `{other}`"))),
        }
    }
}

/// Gaussian clusters around random directions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlobSpec {
    pub n_per_class: usize,
    pub n_classes: usize,
    pub dim: usize,
    /// Norm of every class center.
    pub center_scale: f64,
    /// Per-coordinate standard deviation around the center.
    pub spread: f64,
    /// Sub-clusters per class; each sits at distance `cluster_offset` from
    /// the class center in a random direction.
    pub clusters_per_class: usize,
    pub cluster_offset: f64,
}

impl Default for BlobSpec {
    fn default() -> Self {
        Self {
            n_per_class: 160,
            n_classes: 2,
            dim: 16,
            center_scale: 1.5,
            spread: 0.5,
            clusters_per_class: 3,
            cluster_offset: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSpec {
    Blobs(BlobSpec),
    /// Labeled point-cloud CSV (header with a trailing `label` column).
    Csv {
        path: PathBuf,
    },
}

impl Default for DataSpec {
    fn default() -> Self {
        DataSpec::Blobs(BlobSpec::default())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSpec {
    /// Hidden layer widths.
    pub hidden: Vec<usize>,
    /// Hidden layer used as the representation; defaults to the last one.
    pub rep_layer: Option<usize>,
}

impl Default for ModelSpec {
    fn default() -> Self {
        Self {
            hidden: vec![32, 32],
            rep_layer: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub regime: Regime,
    pub base_lr: f64,
    pub weight_decay: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub lambda: f64,
    pub seeds: Vec<u64>,
    pub data: DataSpec,
    pub model: ModelSpec,
    /// Held-out points embedded every step for anisotropy tracking.
    pub eval_batch: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            regime: Regime::None,
            base_lr: 5e-3,
            weight_decay: 5e-4,
            epochs: 40,
            batch_size: 64,
            lambda: 1.0,
            seeds: (0..5).collect(),
            data: DataSpec::default(),
            model: ModelSpec::default(),
            eval_batch: 64,
        }
    }
}

fn invalid(path: &str, message: impl Into<String>) -> Error {
    Error::Config {
        path: path.to_string(),
        message: message.into(),
    }
}

impl ExperimentConfig {
    /// Parses and validates; errors carry the offending field path.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            invalid(&path, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_regime(mut self, regime: Regime) -> Self {
        self.regime = regime;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.base_lr.is_finite() && self.base_lr > 0.0) {
            return Err(invalid("base_lr", "must be positive"));
        }
        if !(self.weight_decay.is_finite() && self.weight_decay >= 0.0) {
            return Err(invalid("weight_decay", "must be nonnegative"));
        }
        if self.epochs < 1 {
            return Err(invalid("epochs", "must be at least 1"));
        }
        if self.batch_size < 4 {
            return Err(invalid("batch_size", "must be at least 4"));
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(invalid("lambda", "must be nonnegative"));
        }
        if self.seeds.is_empty() {
            return Err(invalid("seeds", "need at least one seed"));
        }
        if self.eval_batch < 3 {
            return Err(invalid("eval_batch", "must be at least 3"));
        }
        if self.model.hidden.is_empty() {
            return Err(invalid("model.hidden", "need at least one hidden layer"));
        }
        if let Some(i) = self.model.hidden.iter().position(|&w| w < 3) {
            return Err(invalid(
                &format!("model.hidden[{i}]"),
                "width must be at least 3",
            ));
        }
        if let Some(r) = self.model.rep_layer {
            if r >= self.model.hidden.len() {
                return Err(invalid("model.rep_layer", "must index a hidden layer"));
            }
        }
        if let DataSpec::Blobs(b) = &self.data {
            if b.n_per_class < 8 {
                return Err(invalid("data.blobs.n_per_class", "must be at least 8"));
            }
            if b.n_classes < 2 {
                return Err(invalid("data.blobs.n_classes", "must be at least 2"));
            }
            if b.dim < 2 {
                return Err(invalid("data.blobs.dim", "must be at least 2"));
            }
            if !(b.spread.is_finite() && b.spread >= 0.0) {
                return Err(invalid("data.blobs.spread", "must be nonnegative"));
            }
            if b.clusters_per_class < 1 {
                return Err(invalid(
                    "data.blobs.clusters_per_class",
                    "must be at least 1",
                ));
            }
            if !(b.cluster_offset.is_finite() && b.cluster_offset >= 0.0) {
                return Err(invalid("data.blobs.cluster_offset", "must be nonnegative"));
            }
            if !(b.center_scale.is_finite() && b.center_scale >= 0.0) {
                return Err(invalid("data.blobs.center_scale", "must be nonnegative"));
            }
        }
        Ok(())
    }
}
