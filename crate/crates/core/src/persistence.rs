//! Zero-dimensional Vietoris–Rips persistence.
//!
//! In dimension 0 every point is born at scale 0 and components die when the
//! first edge joining them enters the filtration, so the finite bars are
//! exactly the edge lengths of a minimum spanning tree. The one essential
//! (infinite) bar is dropped.

use std::cell::Cell;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::DistanceMatrix;

thread_local! {
    static BARCODE_CALLS: Cell<u64> = const { Cell::new(0) };
}

/// Number of barcodes computed on the current thread so far.
pub fn barcode_calls() -> u64 {
    BARCODE_CALLS.with(Cell::get)
}

/// A finite bar together with the spanning-tree edge that kills it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bar {
    pub length: f64,
    #[serde(rename = "a")]
    pub endpoint_a: usize,
    #[serde(rename = "b")]
    pub endpoint_b: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Barcode {
    pub bars: Vec<Bar>,
    pub n_points: usize,
}

impl Barcode {
    pub fn len(&self) -> usize {
        self.bars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bars.is_empty()
    }

    pub fn lengths(&self) -> Vec<f64> {
        self.bars.iter().map(|b| b.length).collect()
    }

    /// Endpoint pairs of the underlying spanning tree, `a < b`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.bars
            .iter()
            .map(|b| (b.endpoint_a, b.endpoint_b))
            .collect()
    }

    /// Bars ordered by descending length, ties by endpoints.
    pub fn sorted_descending(&self) -> Vec<Bar> {
        let mut bars = self.bars.clone();
        bars.sort_by(|x, y| {
            y.length
                .total_cmp(&x.length)
                .then((x.endpoint_a, x.endpoint_b).cmp(&(y.endpoint_a, y.endpoint_b)))
        });
        bars
    }
}

/// Disjoint-set forest with union by rank and path halving.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    pub fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    /// Merges the sets of `i` and `j`; returns false if already joined.
    pub fn union(&mut self, i: usize, j: usize) -> bool {
        let (ri, rj) = (self.find(i), self.find(j));
        if ri == rj {
            return false;
        }
        match self.rank[ri].cmp(&self.rank[rj]) {
            std::cmp::Ordering::Less => self.parent[ri] = rj,
            std::cmp::Ordering::Greater => self.parent[rj] = ri,
            std::cmp::Ordering::Equal => {
                self.parent[rj] = ri;
                self.rank[ri] += 1;
            }
        }
        true
    }
}

/// Finite 0-dimensional barcode of the Vietoris–Rips filtration on `d`.
///
/// Kruskal over all `N(N-1)/2` edges sorted by `(length, i, j)`, so equal
/// lengths always resolve to the same tree. Bars come out in ascending
/// order of length.
pub fn vr_barcode_0d(d: &DistanceMatrix) -> Result<Barcode> {
    let n = d.n_points();
    if n < 2 {
        return Err(Error::TooFewPoints(n));
    }
    BARCODE_CALLS.with(|c| c.set(c.get() + 1));

    let mut edges: Vec<(f64, usize, usize)> = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            edges.push((d.get(i, j), i, j));
        }
    }
    // Stable sort keeps the lexicographic generation order among ties.
    edges.sort_by(|x, y| x.0.total_cmp(&y.0));

    let mut uf = UnionFind::new(n);
    let mut bars = Vec::with_capacity(n - 1);
    for (length, a, b) in edges {
        if uf.union(a, b) {
            bars.push(Bar {
                length,
                endpoint_a: a,
                endpoint_b: b,
            });
            if bars.len() == n - 1 {
                break;
            }
        }
    }
    Ok(Barcode { bars, n_points: n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{pairwise_distances, PointCloud};

    fn line(xs: &[f64]) -> DistanceMatrix {
        let rows: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
        pairwise_distances(&PointCloud::from_rows(&rows).unwrap())
    }

    #[test]
    fn union_find_basics() {
        let mut uf = UnionFind::new(5);
        assert!(uf.union(0, 1));
        assert!(uf.union(3, 4));
        assert!(!uf.union(1, 0));
        assert_eq!(uf.find(0), uf.find(1));
        assert_ne!(uf.find(1), uf.find(3));
        assert!(uf.union(1, 4));
        assert_eq!(uf.find(0), uf.find(3));
    }

    #[test]
    fn single_edge() {
        let b = vr_barcode_0d(&line(&[0.0, 7.0])).unwrap();
        assert_eq!(b.lengths(), vec![7.0]);
        assert_eq!(b.edges(), vec![(0, 1)]);
    }

    #[test]
    fn collinear_gaps() {
        let b = vr_barcode_0d(&line(&[0.0, 1.0, 3.0, 7.0])).unwrap();
        assert_eq!(b.lengths(), vec![1.0, 2.0, 4.0]);
    }

    #[test]
    fn too_few_points() {
        assert!(matches!(
            vr_barcode_0d(&line(&[1.0])),
            Err(Error::TooFewPoints(1))
        ));
    }

    #[test]
    fn ties_resolve_lexicographically() {
        // Unit square: four sides of exactly length 1, diagonals longer.
        let cloud = PointCloud::from_rows(&[
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 1.0],
        ])
        .unwrap();
        let b = vr_barcode_0d(&pairwise_distances(&cloud)).unwrap();
        assert_eq!(b.edges(), vec![(0, 1), (0, 2), (1, 3)]);
        assert_eq!(b.lengths(), vec![1.0; 3]);
    }

    #[test]
    fn duplicate_point_adds_zero_bar() {
        let b = vr_barcode_0d(&line(&[0.0, 2.0, 2.0, 5.0])).unwrap();
        assert_eq!(b.lengths(), vec![0.0, 2.0, 3.0]);
    }

    #[test]
    fn counter_increments() {
        let before = barcode_calls();
        vr_barcode_0d(&line(&[0.0, 1.0])).unwrap();
        assert_eq!(barcode_calls(), before + 1);
    }
}
