use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::config::BlobSpec;
use crate::error::{Error, Result};
use crate::numeric::PointCloud;

/// Labeled points with a fixed train/validation split.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub points: PointCloud,
    pub labels: Vec<usize>,
    pub n_classes: usize,
    pub train: Vec<usize>,
    pub val: Vec<usize>,
}

impl Dataset {
    /// Shuffles deterministically from `seed` and keeps the first 80% for
    /// training.
    pub fn split(points: PointCloud, labels: Vec<usize>, seed: u64) -> Result<Self> {
        let n = points.n_points();
        if labels.len() != n {
            return Err(Error::Shape(format!(
                "{} labels for {n} points",
                labels.len()
            )));
        }
        let n_classes = labels.iter().max().map_or(0, |m| m + 1);
        if n_classes < 2 {
            return Err(Error::InvalidParameter("need at least two classes".into()));
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let n_train = n * 4 / 5;
        if n_train == 0 || n_train == n {
            return Err(Error::InvalidParameter(format!(
                "{n} points are too few to split"
            )));
        }
        let val = order.split_off(n_train);
        Ok(Self {
            points,
            labels,
            n_classes,
            train: order,
            val,
        })
    }

    pub fn rows(&self, idx: &[usize]) -> Array2<f64> {
        self.points.data().select(Axis(0), idx)
    }

    pub fn labels_of(&self, idx: &[usize]) -> Vec<usize> {
        idx.iter().map(|&i| self.labels[i]).collect()
    }

    pub fn dim(&self) -> usize {
        self.points.dim()
    }
}

/// Gaussian blobs: each class center is a random unit vector scaled by
/// `center_scale`, and points scatter around it with standard deviation
/// `spread` per coordinate. Fully determined by `seed`.
pub fn generate_blobs(seed: u64, spec: &BlobSpec) -> Result<Dataset> {
    if spec.n_per_class < 8 || spec.dim < 2 || spec.n_classes < 2 {
        return Err(Error::InvalidParameter(format!(
            "blobs need n_per_class >= 8, dim >= 2, n_classes >= 2; got {spec:?}"
        )));
    }
    if !(spec.spread >= 0.0 && spec.center_scale >= 0.0) {
        return Err(Error::InvalidParameter(
            "spread and center_scale must be nonnegative".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gauss = || -> f64 { StandardNormal.sample(&mut rng) };

    let mut direction = |scale: f64| -> Vec<f64> {
        let v: Vec<f64> = (0..spec.dim).map(|_| gauss()).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter().map(|x| x / norm * scale).collect()
    };
    let centers: Vec<Vec<f64>> = (0..spec.n_classes)
        .map(|_| direction(spec.center_scale))
        .collect();
    let clusters: Vec<Vec<Vec<f64>>> = centers
        .iter()
        .map(|c| {
            (0..spec.clusters_per_class.max(1))
                .map(|_| {
                    let off = direction(spec.cluster_offset);
                    c.iter().zip(&off).map(|(a, b)| a + b).collect()
                })
                .collect()
        })
        .collect();
    let mut gauss = || -> f64 { StandardNormal.sample(&mut rng) };

    let n = spec.n_per_class * spec.n_classes;
    let mut data = Array2::zeros((n, spec.dim));
    let mut labels = Vec::with_capacity(n);
    for (c, subs) in clusters.iter().enumerate() {
        for k in 0..spec.n_per_class {
            let row = c * spec.n_per_class + k;
            let center = &subs[k % subs.len()];
            for (j, mu) in center.iter().enumerate() {
                data[[row, j]] = mu + spec.spread * gauss();
            }
            labels.push(c);
        }
    }
    Dataset::split(PointCloud::new(data)?, labels, seed.wrapping_add(1))
}
