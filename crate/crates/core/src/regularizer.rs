//! Persistent entropy of a point cloud's 0-dimensional barcode as a
//! differentiable function of the point coordinates.
//!
//! The spanning tree and the feature selection are held fixed for each
//! evaluation; derivatives flow only through the bar lengths. For a bar `j`
//! realised by edge `(a, b)`:
//!
//! ```text
//! ∂E/∂l_j = (-ln l_j + Σ_k l_k ln l_k / S) / S
//! ∂l_j/∂x_a = (x_a - x_b) / l_j = -∂l_j/∂x_b
//! ```

use std::collections::BTreeMap;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::entropy::{entropy_of, select_features};
use crate::error::{Error, Result};
use crate::numeric::{pairwise_distances, PointCloud};
use crate::persistence::vr_barcode_0d;

/// Lower clamp on bar lengths inside `ln` and `1/l`.
pub const LENGTH_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionMode {
    AllBars,
    SelectedBars,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyLossGrad {
    pub value: f64,
    /// Same shape as the input cloud.
    pub grad: Array2<f64>,
    /// Set when every active bar has zero length; value and grad are zero.
    pub degenerate: bool,
    /// Spanning-tree edges that contributed, as point-index pairs.
    pub active_edges: Vec<(usize, usize)>,
}

impl EntropyLossGrad {
    fn zeros(n: usize, d: usize) -> Self {
        Self {
            value: 0.0,
            grad: Array2::zeros((n, d)),
            degenerate: false,
            active_edges: Vec::new(),
        }
    }
}

/// Points grouped by class label.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassPartition {
    labels: Vec<usize>,
    groups: BTreeMap<usize, Vec<usize>>,
}

impl ClassPartition {
    pub fn new(labels: Vec<usize>) -> Self {
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, &c) in labels.iter().enumerate() {
            groups.entry(c).or_default().push(i);
        }
        Self { labels, groups }
    }

    /// Everything in one class.
    pub fn single(n: usize) -> Self {
        Self::new(vec![0; n])
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn groups(&self) -> &BTreeMap<usize, Vec<usize>> {
        &self.groups
    }
}

/// Persistent entropy of the cloud's barcode and its gradient with respect
/// to every coordinate. With [`SelectionMode::SelectedBars`] only the bars
/// classified as features contribute, and they are renormalised among
/// themselves.
pub fn entropy_loss_grad(cloud: &PointCloud, mode: SelectionMode) -> Result<EntropyLossGrad> {
    let (n, dim) = (cloud.n_points(), cloud.dim());
    if n < 2 {
        return Err(Error::TooFewPoints(n));
    }
    let barcode = vr_barcode_0d(&pairwise_distances(cloud))?;
    let active: Vec<usize> = match mode {
        SelectionMode::AllBars => (0..barcode.len()).collect(),
        SelectionMode::SelectedBars => select_features(&barcode)?.selected,
    };

    let mut out = EntropyLossGrad::zeros(n, dim);
    out.active_edges = active
        .iter()
        .map(|&j| (barcode.bars[j].endpoint_a, barcode.bars[j].endpoint_b))
        .collect();

    let raw: Vec<f64> = active.iter().map(|&j| barcode.bars[j].length).collect();
    if raw.iter().all(|&l| l == 0.0) {
        out.degenerate = true;
        return Ok(out);
    }
    out.value = entropy_of(&raw);

    let clamped: Vec<f64> = raw.iter().map(|&l| l.max(LENGTH_EPS)).collect();
    let total: f64 = clamped.iter().sum();
    let weighted_log: f64 = clamped.iter().map(|l| l * l.ln()).sum::<f64>() / total;

    for (&j, &len) in active.iter().zip(&clamped) {
        let bar = &barcode.bars[j];
        let de_dl = (-len.ln() + weighted_log) / total;
        let coeff = de_dl / len;
        let (a, b) = (bar.endpoint_a, bar.endpoint_b);
        for c in 0..dim {
            let g = coeff * (cloud.data()[[a, c]] - cloud.data()[[b, c]]);
            out.grad[[a, c]] += g;
            out.grad[[b, c]] -= g;
        }
    }
    Ok(out)
}

/// Sum over classes of [`entropy_loss_grad`] on each class's sub-cloud, with
/// gradients scattered back to the full layout. Classes with fewer than two
/// points contribute nothing.
pub fn per_class_entropy_loss(
    cloud: &PointCloud,
    part: &ClassPartition,
    mode: SelectionMode,
) -> Result<EntropyLossGrad> {
    let (n, dim) = (cloud.n_points(), cloud.dim());
    if part.labels.len() != n {
        return Err(Error::Shape(format!(
            "{} labels for {n} points",
            part.labels.len()
        )));
    }
    let mut out = EntropyLossGrad::zeros(n, dim);
    let mut any_active = false;
    let mut all_degenerate = true;
    for rows in part.groups.values().filter(|rows| rows.len() >= 2) {
        let sub = entropy_loss_grad(&cloud.select(rows)?, mode)?;
        any_active = true;
        all_degenerate &= sub.degenerate;
        out.value += sub.value;
        for (local, &global) in rows.iter().enumerate() {
            out.grad.row_mut(global).assign(&sub.grad.row(local));
        }
        out.active_edges
            .extend(sub.active_edges.iter().map(|&(a, b)| (rows[a], rows[b])));
    }
    out.degenerate = any_active && all_degenerate;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn cloud(rows: &[Vec<f64>]) -> PointCloud {
        PointCloud::from_rows(rows).unwrap()
    }

    #[test]
    fn two_points_are_flat() {
        let c = cloud(&[vec![0.0, 1.0], vec![2.0, -3.0]]);
        for mode in [SelectionMode::AllBars, SelectionMode::SelectedBars] {
            let r = entropy_loss_grad(&c, mode).unwrap();
            assert_eq!(r.value, 0.0);
            assert!(r.grad.iter().all(|g| g.abs() < 1e-15));
        }
    }

    #[test]
    fn equilateral_is_stationary() {
        let h = 3f64.sqrt() / 2.0;
        let c = cloud(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, h]]);
        let r = entropy_loss_grad(&c, SelectionMode::AllBars).unwrap();
        assert!((r.value - 2f64.ln()).abs() < 1e-12);
        let norm = r.grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        assert!(norm <= 1e-9, "{norm}");
    }

    #[test]
    fn duplicate_points_are_degenerate() {
        let c = cloud(&[vec![1.0, 1.0], vec![1.0, 1.0], vec![1.0, 1.0]]);
        let r = entropy_loss_grad(&c, SelectionMode::AllBars).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.value, 0.0);
        assert!(r.grad.iter().all(|g| *g == 0.0));
    }

    #[test]
    fn one_duplicate_keeps_gradient_finite() {
        let c = cloud(&[vec![0.0], vec![0.0], vec![1.0], vec![3.0]]);
        let r = entropy_loss_grad(&c, SelectionMode::AllBars).unwrap();
        assert!(!r.degenerate);
        assert!(r.grad.iter().all(|g| g.is_finite()));
    }

    #[test]
    fn too_few_points() {
        let c = cloud(&[vec![0.0, 0.0]]);
        assert!(matches!(
            entropy_loss_grad(&c, SelectionMode::AllBars),
            Err(Error::TooFewPoints(1))
        ));
    }

    #[test]
    fn partition_groups() {
        let p = ClassPartition::new(vec![1, 0, 1, 2]);
        assert_eq!(p.groups()[&1], vec![0, 2]);
        assert_eq!(p.groups()[&0], vec![1]);
        assert_eq!(p.groups().len(), 3);
    }

    #[test]
    fn paired_classes_have_zero_entropy() {
        let c = cloud(&[
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![5.0, 5.0],
            vec![5.0, 7.0],
        ]);
        let p = ClassPartition::new(vec![0, 0, 1, 1]);
        let r = per_class_entropy_loss(&c, &p, SelectionMode::AllBars).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.active_edges, vec![(0, 1), (2, 3)]);
    }

    #[test]
    fn singletons_skipped() {
        let c = cloud(&[vec![0.0], vec![1.0], vec![2.0]]);
        let p = ClassPartition::new(vec![0, 1, 2]);
        let r = per_class_entropy_loss(&c, &p, SelectionMode::SelectedBars).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(!r.degenerate);
        assert_eq!(r.grad, array![[0.0], [0.0], [0.0]]);
    }

    #[test]
    fn label_count_mismatch() {
        let c = cloud(&[vec![0.0], vec![1.0]]);
        let p = ClassPartition::new(vec![0]);
        assert!(per_class_entropy_loss(&c, &p, SelectionMode::AllBars).is_err());
    }
}
