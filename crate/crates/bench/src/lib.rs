//! Inputs shared by the benchmarks.

use num_bigint::BigInt;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// A sparse-ish integer matrix with entries in `-2..=2`, reproducible from `seed`.
pub fn sample_matrix(rows: usize, cols: usize, seed: u64) -> Vec<Vec<BigInt>> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..rows)
        .map(|_| {
            (0..cols)
                .map(|_| if rng.gen_bool(0.3) { BigInt::from(rng.gen_range(-2i64..=2)) } else { BigInt::from(0) })
                .collect()
        })
        .collect()
}
