//! Independent reference implementations used as test oracles. Apart from
//! the finite-difference driver, which evaluates the function under test,
//! nothing here calls into the library's algorithms.
#![allow(dead_code)]

use std::collections::BTreeSet;

use ndarray::Array2;
use persreg_core::{entropy_loss_grad, PointCloud, SelectionMode};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(seed: u64, n: usize, d: usize) -> Array2<f64> {
    let mut r = rng(seed);
    Array2::from_shape_simple_fn((n, d), || StandardNormal.sample(&mut r))
}

pub fn cloud(seed: u64, n: usize, d: usize) -> PointCloud {
    PointCloud::new(gaussian(seed, n, d)).unwrap()
}

fn dist(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

fn rows(m: &Array2<f64>) -> Vec<Vec<f64>> {
    m.outer_iter().map(|r| r.to_vec()).collect()
}

/// Merge heights of naive agglomerative single-linkage clustering, ascending.
pub fn single_linkage_heights(points: &Array2<f64>) -> Vec<f64> {
    let pts = rows(points);
    let mut clusters: Vec<Vec<usize>> = (0..pts.len()).map(|i| vec![i]).collect();
    let mut heights = Vec::new();
    while clusters.len() > 1 {
        let mut best = (f64::INFINITY, 0, 0);
        for a in 0..clusters.len() {
            for b in (a + 1)..clusters.len() {
                for &i in &clusters[a] {
                    for &j in &clusters[b] {
                        let d = dist(&pts[i], &pts[j]);
                        if d < best.0 {
                            best = (d, a, b);
                        }
                    }
                }
            }
        }
        let (h, a, b) = best;
        let merged = clusters.remove(b);
        clusters[a].extend(merged);
        heights.push(h);
    }
    heights.sort_by(f64::total_cmp);
    heights
}

/// Minimum spanning tree weight by Prim's algorithm on the dense graph.
pub fn prim_mst_weight(points: &Array2<f64>) -> f64 {
    let pts = rows(points);
    let n = pts.len();
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    best[0] = 0.0;
    let mut total = 0.0;
    for _ in 0..n {
        let u = (0..n)
            .filter(|&v| !in_tree[v])
            .min_by(|&x, &y| best[x].total_cmp(&best[y]))
            .unwrap();
        in_tree[u] = true;
        total += best[u];
        for v in 0..n {
            if !in_tree[v] {
                best[v] = best[v].min(dist(&pts[u], &pts[v]));
            }
        }
    }
    total
}

fn shannon(v: &[f64]) -> f64 {
    let s: f64 = v.iter().sum();
    let mut e = 0.0;
    for &x in v {
        if x > 0.0 {
            e -= (x / s) * (x / s).ln();
        }
    }
    e
}

/// Literal transcription of the entropy-based feature selection, with the
/// working list laid out as `l_1 >= .. >= l_{n'-2}, l_{n'-1} = r, l_{n'} = T`
/// and 1-based indices. Each pass materialises the neutralised barcode
/// `L'_i` and sums it directly. Returns source indices of the features,
/// longest first.
pub fn reference_select(lengths: &[f64]) -> Vec<usize> {
    let n = lengths.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| lengths[b].partial_cmp(&lengths[a]).unwrap().then(a.cmp(&b)));
    if n == 1 || lengths[idx[0]] == lengths[idx[n - 1]] {
        return idx;
    }
    let t = idx[0];
    let r = idx[n - 1];
    let alpha = lengths[r] / lengths[t];

    // l[k - 1] holds l_k.
    let mut l: Vec<usize> = idx[1..n - 1].to_vec();
    l.push(r);
    l.push(t);

    'outer: loop {
        let np = l.len();
        let vals: Vec<f64> = l.iter().map(|&j| lengths[j]).collect();
        let mut s_prev: f64 = vals.iter().sum();
        let mut i = 1;
        while i <= np - 2 {
            let tail: Vec<f64> = vals[i..].to_vec(); // l_{i+1} ..= l_{n'}
            let p_i: f64 = tail.iter().sum();
            let l_neutral = p_i / shannon(&tail).exp();
            let mut l_prime = vec![l_neutral; i];
            l_prime.extend(&tail);
            let s_i: f64 = l_prime.iter().sum();
            let c = s_prev / s_i;
            let q = (alpha * np as f64 * (alpha - 1.0 - alpha.ln()) / (alpha - 1.0).powi(2)).round()
                as usize;
            if c < 1.0 {
                let mut out = vec![t];
                out.extend(&l[..i - 1]);
                return out;
            }
            if q <= i && i < np - 2 {
                let mut next = l[..i].to_vec();
                next.push(r);
                next.push(t);
                l = next;
                continue 'outer;
            }
            s_prev = s_i;
            i += 1;
        }
        let mut out = vec![t];
        out.extend(&l[..np - 2]);
        return out;
    }
}

/// Outcome of comparing an analytic gradient with central differences.
#[derive(Debug, Clone, Copy)]
pub struct FdReport {
    /// Worst relative error over coordinates whose active edge set is the
    /// same at `x - h`, `x` and `x + h`.
    pub max_rel_err: f64,
    /// Coordinates skipped because a perturbation changed the edge set.
    pub unstable: usize,
}

/// Absolute scale below which differences count as round-off: a central
/// difference with `h = 1e-6` on an O(1) objective carries about
/// `eps * |f| / h ~ 5e-10` of cancellation error.
pub const FD_FLOOR: f64 = 1e-5;

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(FD_FLOOR)
}

fn edge_set(edges: &[(usize, usize)]) -> BTreeSet<(usize, usize)> {
    edges.iter().copied().collect()
}

pub fn fd_check(cloud: &PointCloud, mode: SelectionMode, h: f64) -> FdReport {
    let base = entropy_loss_grad(cloud, mode).unwrap();
    let edges = edge_set(&base.active_edges);
    let x = cloud.data().to_owned();
    let mut report = FdReport {
        max_rel_err: 0.0,
        unstable: 0,
    };
    for i in 0..x.nrows() {
        for c in 0..x.ncols() {
            let eval = |delta: f64| {
                let mut y = x.clone();
                y[[i, c]] += delta;
                entropy_loss_grad(&PointCloud::new(y).unwrap(), mode).unwrap()
            };
            let (plus, minus) = (eval(h), eval(-h));
            if edge_set(&plus.active_edges) != edges || edge_set(&minus.active_edges) != edges {
                report.unstable += 1;
                continue;
            }
            let fd = (plus.value - minus.value) / (2.0 * h);
            report.max_rel_err = report.max_rel_err.max(rel_err(base.grad[[i, c]], fd));
        }
    }
    report
}
