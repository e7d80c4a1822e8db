//! Input generators shared by the benchmarks.

use persreg_core::PointCloud;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// `n x d` standard-normal cloud.
pub fn random_cloud(seed: u64, n: usize, d: usize) -> PointCloud {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect();
    PointCloud::from_rows(&rows).expect("finite samples")
}
