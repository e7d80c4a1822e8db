use std::collections::BTreeMap;

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Affine map `x W + b`; `weights` is `in x out`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

impl Layer {
    pub fn new(weights: Array2<f64>, bias: Array1<f64>) -> Result<Self> {
        if weights.ncols() != bias.len() {
            return Err(Error::Shape(format!(
                "bias of length {} for {} outputs",
                bias.len(),
                weights.ncols()
            )));
        }
        Ok(Self {
            weights: weights.as_standard_layout().into_owned(),
            bias,
        })
    }

    pub fn zeros(n_in: usize, n_out: usize) -> Self {
        Self {
            weights: Array2::zeros((n_in, n_out)),
            bias: Array1::zeros(n_out),
        }
    }

    pub fn n_in(&self) -> usize {
        self.weights.nrows()
    }

    pub fn n_out(&self) -> usize {
        self.weights.ncols()
    }
}

/// Feedforward classifier: tanh on hidden layers, identity on the output.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    layers: Vec<Layer>,
    rep_layer: usize,
}

/// Activations kept from a forward pass. `activations[0]` is the input and
/// `activations[l + 1]` the output of layer `l`; the last entry holds the
/// logits.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub activations: Vec<Array2<f64>>,
    rep_layer: usize,
}

impl ForwardCache {
    pub fn logits(&self) -> &Array2<f64> {
        self.activations.last().expect("at least input and logits")
    }

    pub fn representations(&self) -> &Array2<f64> {
        &self.activations[self.rep_layer + 1]
    }
}

/// Parameter gradients, laid out like [`Mlp::layers`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<Layer>,
}

impl Gradients {
    pub fn tensors(&self) -> Vec<&[f64]> {
        self.layers
            .iter()
            .flat_map(|l| {
                [
                    l.weights.as_slice().expect("standard layout"),
                    l.bias.as_slice().expect("contiguous"),
                ]
            })
            .collect()
    }
}

impl Mlp {
    /// `rep_layer` indexes a hidden layer whose tanh output serves as the
    /// representation. A network without hidden layers uses its logits.
    pub fn from_layers(layers: Vec<Layer>, rep_layer: usize) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Shape("network needs at least one layer".into()));
        }
        for (i, w) in layers.windows(2).enumerate() {
            if w[0].n_out() != w[1].n_in() {
                return Err(Error::Shape(format!(
                    "layer {i} outputs {} but layer {} expects {}",
                    w[0].n_out(),
                    i + 1,
                    w[1].n_in()
                )));
            }
        }
        let n_hidden = layers.len() - 1;
        let valid = if n_hidden == 0 {
            rep_layer == 0
        } else {
            rep_layer < n_hidden
        };
        if !valid {
            return Err(Error::Shape(format!(
                "representation layer {rep_layer} is not a hidden layer"
            )));
        }
        Ok(Self { layers, rep_layer })
    }

    /// Glorot-normal weights and zero biases for the given layer widths
    /// (input first, classes last). Representations default to the last
    /// hidden layer.
    pub fn init<R: Rng + ?Sized>(
        dims: &[usize],
        rep_layer: Option<usize>,
        rng: &mut R,
    ) -> Result<Self> {
        if dims.len() < 2 || dims.contains(&0) {
            return Err(Error::Shape(format!("invalid layer widths {dims:?}")));
        }
        let layers = dims
            .windows(2)
            .map(|w| {
                let std = (2.0 / (w[0] + w[1]) as f64).sqrt();
                let normal = Normal::new(0.0, std).expect("positive std");
                Layer {
                    weights: Array2::from_shape_simple_fn((w[0], w[1]), || normal.sample(rng)),
                    bias: Array1::zeros(w[1]),
                }
            })
            .collect::<Vec<_>>();
        let rep = rep_layer.unwrap_or(layers.len().saturating_sub(2));
        Self::from_layers(layers, rep)
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn rep_layer(&self) -> usize {
        self.rep_layer
    }

    pub fn n_inputs(&self) -> usize {
        self.layers[0].n_in()
    }

    pub fn n_classes(&self) -> usize {
        self.layers.last().map_or(0, Layer::n_out)
    }

    fn is_hidden(&self, l: usize) -> bool {
        l + 1 < self.layers.len()
    }

    pub fn forward(&self, batch: ArrayView2<'_, f64>) -> Result<ForwardCache> {
        if batch.ncols() != self.n_inputs() {
            return Err(Error::Shape(format!(
                "batch has {} features, network expects {}",
                batch.ncols(),
                self.n_inputs()
            )));
        }
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        activations.push(batch.to_owned());
        for (l, layer) in self.layers.iter().enumerate() {
            let mut z = activations[l].dot(&layer.weights) + &layer.bias;
            if self.is_hidden(l) {
                z.mapv_inplace(f64::tanh);
            }
            activations.push(z);
        }
        Ok(ForwardCache {
            activations,
            rep_layer: self.rep_layer,
        })
    }

    /// Backpropagates `d_logits` (∂loss/∂logits) plus an optional gradient
    /// injected at the representation layer's output.
    pub fn backward(
        &self,
        cache: &ForwardCache,
        d_logits: &Array2<f64>,
        d_rep: Option<&Array2<f64>>,
    ) -> Gradients {
        let n_layers = self.layers.len();
        let mut grads: Vec<Layer> = Vec::with_capacity(n_layers);
        let mut upstream = d_logits.clone();
        if let (Some(extra), false) = (d_rep, self.is_hidden(self.rep_layer)) {
            upstream += extra;
        }
        for l in (0..n_layers).rev() {
            let layer = &self.layers[l];
            let out = &cache.activations[l + 1];
            let dz = if self.is_hidden(l) {
                if let (Some(extra), true) = (d_rep, l == self.rep_layer) {
                    upstream += extra;
                }
                &upstream * &out.mapv(|a| 1.0 - a * a)
            } else {
                upstream
            };
            let input = &cache.activations[l];
            grads.push(Layer {
                weights: input.t().dot(&dz),
                bias: dz.sum_axis(Axis(0)),
            });
            upstream = dz.dot(&layer.weights.t());
        }
        grads.reverse();
        Gradients { layers: grads }
    }

    /// Parameter tensors in the same order as [`Gradients::tensors`].
    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        self.layers
            .iter_mut()
            .flat_map(|l| {
                [
                    l.weights.as_slice_mut().expect("standard layout"),
                    l.bias.as_slice_mut().expect("contiguous"),
                ]
            })
            .collect()
    }

    pub fn tensors(&self) -> Vec<&[f64]> {
        self.layers
            .iter()
            .flat_map(|l| {
                [
                    l.weights.as_slice().expect("standard layout"),
                    l.bias.as_slice().expect("contiguous"),
                ]
            })
            .collect()
    }

    pub fn is_finite(&self) -> bool {
        self.tensors()
            .iter()
            .all(|t| t.iter().all(|v| v.is_finite()))
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        Checkpoint(
            self.layers
                .iter()
                .enumerate()
                .map(|(i, l)| {
                    (
                        i.to_string(),
                        LayerRecord {
                            weights: l.weights.iter().copied().collect(),
                            bias: l.bias.to_vec(),
                            dims: [l.n_in(), l.n_out()],
                        },
                    )
                })
                .collect(),
        )
    }

    pub fn from_checkpoint(ckpt: &Checkpoint, rep_layer: usize) -> Result<Self> {
        let mut layers = Vec::with_capacity(ckpt.0.len());
        for i in 0..ckpt.0.len() {
            let rec = ckpt
                .0
                .get(&i.to_string())
                .ok_or_else(|| Error::Shape(format!("checkpoint is missing layer {i}")))?;
            let weights = Array2::from_shape_vec((rec.dims[0], rec.dims[1]), rec.weights.clone())
                .map_err(|e| Error::Shape(format!("layer {i}: {e}")))?;
            layers.push(Layer::new(weights, Array1::from(rec.bias.clone()))?);
        }
        Self::from_layers(layers, rep_layer)
    }
}

/// One layer of a checkpoint: row-major `in x out` weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerRecord {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub dims: [usize; 2],
}

/// Flat JSON object keyed by layer index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Checkpoint(pub BTreeMap<String, LayerRecord>);

/// Mean softmax cross-entropy over the batch and its gradient with respect to
/// the logits. Uses log-sum-exp for stability.
pub fn softmax_cross_entropy(logits: &Array2<f64>, labels: &[usize]) -> Result<(f64, Array2<f64>)> {
    let (b, c) = logits.dim();
    if labels.len() != b {
        return Err(Error::Shape(format!(
            "{} labels for batch of {b}",
            labels.len()
        )));
    }
    if let Some(&bad) = labels.iter().find(|&&y| y >= c) {
        return Err(Error::InvalidParameter(format!(
            "label {bad} out of range for {c} classes"
        )));
    }
    if b == 0 {
        return Err(Error::EmptyInput("batch"));
    }
    let mut loss = 0.0;
    let mut grad = Array2::zeros((b, c));
    for (i, row) in logits.outer_iter().enumerate() {
        let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        let lse = max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
        loss += lse - row[labels[i]];
        for j in 0..c {
            let p = (row[j] - lse).exp();
            grad[[i, j]] = (p - if j == labels[i] { 1.0 } else { 0.0 }) / b as f64;
        }
    }
    Ok((loss / b as f64, grad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_network_gives_uniform_softmax() {
        let mlp = Mlp::from_layers(vec![Layer::zeros(3, 4), Layer::zeros(4, 3)], 0).unwrap();
        let cache = mlp
            .forward(array![[1.0, -2.0, 0.5], [3.0, 0.0, 1.0]].view())
            .unwrap();
        assert!(cache.logits().iter().all(|&v| v == 0.0));
        let (loss, _) = softmax_cross_entropy(cache.logits(), &[0, 2]).unwrap();
        assert!((loss - 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn identity_layer() {
        let layer = Layer::new(Array2::eye(3), Array1::zeros(3)).unwrap();
        let mlp = Mlp::from_layers(vec![layer], 0).unwrap();
        let x = array![[1.0, 2.0, 3.0], [-1.0, 0.5, 0.0]];
        let cache = mlp.forward(x.view()).unwrap();
        assert_eq!(cache.logits(), &x);
        assert_eq!(cache.representations(), &x);
    }

    #[test]
    fn shape_checks() {
        assert!(Mlp::from_layers(vec![Layer::zeros(3, 4), Layer::zeros(5, 2)], 0).is_err());
        assert!(Mlp::from_layers(vec![Layer::zeros(3, 4), Layer::zeros(4, 2)], 1).is_err());
        assert!(Mlp::from_layers(vec![], 0).is_err());
        let mlp = Mlp::from_layers(vec![Layer::zeros(3, 2)], 0).unwrap();
        assert!(mlp.forward(array![[1.0, 2.0]].view()).is_err());
        assert!(Layer::new(Array2::zeros((2, 3)), Array1::zeros(2)).is_err());
    }

    #[test]
    fn default_rep_layer_is_last_hidden() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mlp = Mlp::init(&[4, 8, 6, 2], None, &mut rng).unwrap();
        assert_eq!(mlp.rep_layer(), 1);
        let cache = mlp.forward(Array2::zeros((5, 4)).view()).unwrap();
        assert_eq!(cache.representations().dim(), (5, 6));
    }

    #[test]
    fn checkpoint_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mlp = Mlp::init(&[3, 5, 2], None, &mut rng).unwrap();
        let json = serde_json::to_string(&mlp.to_checkpoint()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["0"]["dims"], serde_json::json!([3, 5]));
        assert_eq!(v["1"]["bias"].as_array().unwrap().len(), 2);
        let back: Checkpoint = serde_json::from_str(&json).unwrap();
        assert_eq!(Mlp::from_checkpoint(&back, 0).unwrap(), mlp);
    }

    #[test]
    fn cross_entropy_label_errors() {
        let logits = Array2::zeros((2, 2));
        assert!(softmax_cross_entropy(&logits, &[0]).is_err());
        assert!(softmax_cross_entropy(&logits, &[0, 2]).is_err());
    }

    #[test]
    fn cross_entropy_is_stable_for_large_logits() {
        let logits = array![[1000.0, 0.0], [0.0, -1000.0]];
        let (loss, grad) = softmax_cross_entropy(&logits, &[1, 0]).unwrap();
        assert!((loss - 500.0).abs() < 1e-9);
        assert!(grad.iter().all(|g| g.is_finite()));
    }
}
