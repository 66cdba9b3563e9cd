//! Benchmark fixtures shared by the criterion suites.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use skewjeff_core::{Dataset, SkewFamily, SkewSymmetric};

/// `n` draws from `family` at `(0, 1, lambda)`.
pub fn sample(family: SkewFamily, lambda: f64, n: usize, seed: u64) -> Dataset {
    let d = SkewSymmetric::new(0.0, 1.0, lambda, family).expect("valid parameters");
    Dataset::exact(d.sample(n, &mut ChaCha8Rng::seed_from_u64(seed))).expect("finite sample")
}
