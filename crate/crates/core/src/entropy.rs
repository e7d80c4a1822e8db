//! Persistent entropy and entropy-based separation of topological features
//! from noise in a barcode.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::persistence::Barcode;

/// Nonempty multiset of nonnegative, finite bar lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct BarLengths {
    lengths: Vec<f64>,
    total: f64,
}

impl BarLengths {
    pub fn new(lengths: Vec<f64>) -> Result<Self> {
        if lengths.is_empty() {
            return Err(Error::EmptyInput("bar lengths"));
        }
        if let Some(l) = lengths.iter().find(|l| !l.is_finite() || **l < 0.0) {
            return Err(Error::InvalidParameter(format!(
                "bar length must be finite and nonnegative, got {l}"
            )));
        }
        let total = lengths.iter().sum();
        Ok(Self { lengths, total })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.lengths
    }

    pub fn total(&self) -> f64 {
        self.total
    }
}

/// Shannon entropy (natural log) of `lengths / sum`; zero-length bars
/// contribute nothing. Caller guarantees a positive sum.
pub(crate) fn entropy_of(lengths: &[f64]) -> f64 {
    let total: f64 = lengths.iter().sum();
    let h = -lengths
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|&l| {
            let p = l / total;
            p * p.ln()
        })
        .sum::<f64>();
    // Avoid reporting -0 for a single bar.
    h + 0.0
}

/// Persistent entropy `-Σ p_i ln p_i` with `p_i = l_i / Σ l`.
/// Lies in `[0, ln n]`.
pub fn persistent_entropy(l: &BarLengths) -> Result<f64> {
    if l.total <= 0.0 {
        return Err(Error::DegenerateBarcode);
    }
    Ok(entropy_of(&l.lengths))
}

/// Upper bound `Q` on the number of admissible features for a barcode of
/// `n` bars with shortest-to-longest ratio `alpha`, rounded half away from
/// zero. `alpha = 0` takes the limiting value 0.
pub fn max_feature_count(alpha: f64, n: usize) -> Result<usize> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in [0, 1), got {alpha}"
        )));
    }
    if alpha == 0.0 {
        return Ok(0);
    }
    let q = alpha * n as f64 * (alpha - 1.0 - alpha.ln()) / ((alpha - 1.0) * (alpha - 1.0));
    Ok(q.round() as usize)
}

/// Diagnostics for one pass of the selection loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SelectionStep {
    pub i: usize,
    /// Working barcode size during this pass.
    pub n_prime: usize,
    pub q: usize,
    pub c: f64,
    /// Common length assigned to the first `i` bars.
    pub neutral_length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionResult {
    /// Indices into the source barcode, longest first.
    pub selected: Vec<usize>,
    /// Remaining indices, ascending.
    pub noise: Vec<usize>,
    pub alpha: f64,
    pub q_trace: Vec<SelectionStep>,
}

/// Splits `lengths` into topological features and noise.
///
/// The longest bar `T` is always a feature and the shortest bar `r` is
/// always noise. The remaining bars `l_1 >= l_2 >= ...` are examined in
/// turn: the first `i` are replaced by the common length
/// `P_i / exp(E(l_{i+1}, .., r, T))` and the total length is compared with
/// the previous pass through `C = S_{i-1} / S_i`. Bar `i` is a feature while
/// `C >= 1`; the first `C < 1` ends the scan. Whenever `i` reaches the bound
/// `Q` before the list is exhausted, the bars after `i` are discarded as noise
/// and the scan restarts on the shortened barcode.
pub fn select_from_lengths(lengths: &[f64]) -> Result<SelectionResult> {
    let n = lengths.len();
    if n == 0 {
        return Err(Error::EmptyInput("barcode"));
    }
    if lengths.iter().any(|l| !l.is_finite() || *l < 0.0) {
        return Err(Error::InvalidParameter(
            "bar lengths must be finite and nonnegative".into(),
        ));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| lengths[y].total_cmp(&lengths[x]).then(x.cmp(&y)));

    let longest = order[0];
    let shortest = order[n - 1];
    let (t_len, r_len) = (lengths[longest], lengths[shortest]);

    if n == 1 || t_len == r_len {
        return Ok(SelectionResult {
            selected: order,
            noise: Vec::new(),
            alpha: 1.0,
            q_trace: Vec::new(),
        });
    }
    let alpha = r_len / t_len;

    let mut middle: Vec<usize> = order[1..n - 1].to_vec();
    let mut trace = Vec::new();

    let n_features = 'restart: loop {
        let n_prime = middle.len() + 2;
        let working: Vec<f64> = middle
            .iter()
            .map(|&j| lengths[j])
            .chain([r_len, t_len])
            .collect();

        let mut s_prev: f64 = working.iter().sum();
        for i in 1..=n_prime - 2 {
            let rest = &working[i..];
            let p: f64 = rest.iter().sum();
            let neutral = p / entropy_of(rest).exp();
            let s = p + i as f64 * neutral;
            let c = s_prev / s;
            let q = max_feature_count(alpha, n_prime)?;
            trace.push(SelectionStep {
                i,
                n_prime,
                q,
                c,
                neutral_length: neutral,
            });

            if c < 1.0 {
                break 'restart i - 1;
            }
            if q <= i && i < n_prime - 2 {
                middle.truncate(i);
                continue 'restart;
            }
            s_prev = s;
        }
        break middle.len();
    };

    let mut selected = vec![longest];
    selected.extend_from_slice(&middle[..n_features]);
    let mut noise: Vec<usize> = (0..n).filter(|j| !selected.contains(j)).collect();
    noise.sort_unstable();

    Ok(SelectionResult {
        selected,
        noise,
        alpha,
        q_trace: trace,
    })
}

/// Feature selection on a barcode; indices refer to `b.bars`.
pub fn select_features(b: &Barcode) -> Result<SelectionResult> {
    select_from_lengths(&b.lengths())
}
