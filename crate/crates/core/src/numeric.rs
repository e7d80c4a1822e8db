//! Dense real-matrix primitives: point clouds, Euclidean distances, singular
//! values via a cyclic Jacobi eigensolver, and anisotropy scores.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use serde::Serialize;

use crate::error::{Error, Result};

/// Sweep budget for the cyclic Jacobi eigensolver.
pub const JACOBI_MAX_SWEEPS: usize = 100;
/// Off-diagonal Frobenius norm, relative to the input's Frobenius norm, at
/// which the Jacobi iteration stops.
pub const JACOBI_TOL: f64 = 1e-12;

/// An `N x D` matrix of finite coordinates, one point per row.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    data: Array2<f64>,
}

impl PointCloud {
    pub fn new(data: Array2<f64>) -> Result<Self> {
        let (rows, cols) = data.dim();
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyCloud { rows, cols });
        }
        if let Some(((row, col), _)) = data.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { row, col });
        }
        Ok(Self { data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let d = rows.first().map_or(0, Vec::len);
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != d) {
            return Err(Error::Shape(format!(
                "row {i} has {} columns, expected {d}",
                r.len()
            )));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let data = Array2::from_shape_vec((n, d), flat).map_err(|e| Error::Shape(e.to_string()))?;
        Self::new(data)
    }

    pub fn n_points(&self) -> usize {
        self.data.nrows()
    }

    pub fn dim(&self) -> usize {
        self.data.ncols()
    }

    pub fn data(&self) -> ArrayView2<'_, f64> {
        self.data.view()
    }

    pub fn point(&self, i: usize) -> ArrayView1<'_, f64> {
        self.data.row(i)
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.data
    }

    /// Sub-cloud made of the given rows, in order.
    pub fn select(&self, rows: &[usize]) -> Result<Self> {
        Self::new(self.data.select(Axis(0), rows))
    }
}

/// Symmetric `N x N` matrix of pairwise Euclidean distances.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    d: Array2<f64>,
}

impl DistanceMatrix {
    pub fn n_points(&self) -> usize {
        self.d.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[[i, j]]
    }

    pub fn as_array(&self) -> ArrayView2<'_, f64> {
        self.d.view()
    }
}

/// Singular values sorted in descending order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingularSpectrum {
    pub sigma: Vec<f64>,
}

impl SingularSpectrum {
    /// Squared singular values, i.e. the eigenvalues of the Gram matrix.
    pub fn energies(&self) -> impl Iterator<Item = f64> + '_ {
        self.sigma.iter().map(|s| s * s)
    }
}

/// Anisotropy scores for `k = 1..=scores.len()`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnisotropyProfile {
    pub scores: Vec<f64>,
    pub centered: bool,
}

fn euclidean(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Euclidean distances between every pair of points.
///
/// Each entry is summed over coordinates in column order, so the result does
/// not depend on how the entries are scheduled.
pub fn pairwise_distances(cloud: &PointCloud) -> DistanceMatrix {
    let n = cloud.n_points();
    let mut d = Array2::zeros((n, n));
    for i in 0..n {
        for j in (i + 1)..n {
            let v = euclidean(cloud.point(i), cloud.point(j));
            d[[i, j]] = v;
            d[[j, i]] = v;
        }
    }
    DistanceMatrix { d }
}

fn off_diagonal_norm(a: &Array2<f64>) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for p in 0..n {
        for q in 0..n {
            if p != q {
                s += a[[p, q]] * a[[p, q]];
            }
        }
    }
    s.sqrt()
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, sorted
/// descending.
pub fn symmetric_eigenvalues(a: ArrayView2<'_, f64>) -> Result<Vec<f64>> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::Shape(format!(
            "expected square matrix, got {:?}",
            a.dim()
        )));
    }
    let mut a = a.to_owned();
    let scale = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let threshold = JACOBI_TOL * scale;

    let mut converged = false;
    for _ in 0..=JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(&a) <= threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[[p, q]];
                if apq == 0.0 {
                    continue;
                }
                let app = a[[p, p]];
                let aqq = a[[q, q]];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                a[[p, p]] = app - t * apq;
                a[[q, q]] = aqq + t * apq;
                a[[p, q]] = 0.0;
                a[[q, p]] = 0.0;
                for r in 0..n {
                    if r == p || r == q {
                        continue;
                    }
                    let arp = a[[r, p]];
                    let arq = a[[r, q]];
                    let new_rp = c * arp - s * arq;
                    let new_rq = s * arp + c * arq;
                    a[[r, p]] = new_rp;
                    a[[p, r]] = new_rp;
                    a[[r, q]] = new_rq;
                    a[[q, r]] = new_rq;
                }
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            sweeps: JACOBI_MAX_SWEEPS,
        });
    }

    let mut eig: Vec<f64> = a.diag().to_vec();
    eig.sort_by(|x, y| y.total_cmp(x));
    Ok(eig)
}

fn check_finite(m: ArrayView2<'_, f64>) -> Result<()> {
    match m.indexed_iter().find(|(_, v)| !v.is_finite()) {
        Some(((row, col), _)) => Err(Error::NonFinite { row, col }),
        None => Ok(()),
    }
}

/// Singular values of `m`, descending, `min(N, D)` of them.
///
/// Computed as square roots of the Gram matrix eigenvalues (clamped at zero).
/// The smaller of `mᵀm` and `mmᵀ` is used; both share the nonzero spectrum.
pub fn singular_values(m: ArrayView2<'_, f64>) -> Result<SingularSpectrum> {
    check_finite(m)?;
    let (n, d) = m.dim();
    if n == 0 || d == 0 {
        return Err(Error::EmptyCloud { rows: n, cols: d });
    }
    let gram = if d <= n { m.t().dot(&m) } else { m.dot(&m.t()) };
    let sigma = symmetric_eigenvalues(gram.view())?
        .into_iter()
        .map(|l| l.max(0.0).sqrt())
        .collect();
    Ok(SingularSpectrum { sigma })
}

/// Subtract the column mean from every row.
pub fn center_columns(m: ArrayView2<'_, f64>) -> Array2<f64> {
    let mean: Array1<f64> = m
        .mean_axis(Axis(0))
        .unwrap_or_else(|| Array1::zeros(m.ncols()));
    &m - &mean
}

fn energy_shares(m: ArrayView2<'_, f64>, centered: bool) -> Result<Vec<f64>> {
    let spectrum = if centered {
        singular_values(center_columns(m).view())?
    } else {
        singular_values(m)?
    };
    let total: f64 = spectrum.energies().sum();
    if total <= 0.0 {
        return Err(Error::ZeroMatrix);
    }
    Ok(spectrum.energies().map(|e| e / total).collect())
}

/// The k-th anisotropy score `σ_k² / Σ σ_i²` (k is 1-based).
///
/// With `centered`, the column mean is removed first and the score is the
/// k-th eigenvalue share of the covariance matrix.
pub fn anisotropy(m: ArrayView2<'_, f64>, k: usize, centered: bool) -> Result<f64> {
    let max = m.nrows().min(m.ncols());
    if k == 0 || k > max {
        return Err(Error::KOutOfRange { k, max });
    }
    Ok(energy_shares(m, centered)?[k - 1])
}

/// Anisotropy scores for `k = 1..=k_max` from a single decomposition.
pub fn anisotropy_profile(
    m: ArrayView2<'_, f64>,
    k_max: usize,
    centered: bool,
) -> Result<AnisotropyProfile> {
    let max = m.nrows().min(m.ncols());
    if k_max == 0 || k_max > max {
        return Err(Error::KOutOfRange { k: k_max, max });
    }
    let mut scores = energy_shares(m, centered)?;
    scores.truncate(k_max);
    Ok(AnisotropyProfile { scores, centered })
}
