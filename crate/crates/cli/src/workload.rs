//! Synthetic inputs: uniform 32-bit word vectors for protocol runs, plus a
//! float mode routed through the fixed-point codec.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::fixedpoint::{FixedPointCodec, FixedPointError};

/// `count` uniform word vectors of length `dim`, reproducible from `seed`.
pub fn word_vectors(seed: u64, count: usize, dim: usize) -> Vec<Vec<u32>> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| (0..dim).map(|_| rng.gen()).collect())
        .collect()
}

/// A float vector drawn uniformly from `[lo, hi)` together with its
/// fixed-point encoding.
pub fn float_vector(
    seed: u64,
    dim: usize,
    lo: f64,
    hi: f64,
    codec: &FixedPointCodec,
) -> Result<(Vec<f64>, Vec<u32>), FixedPointError> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut floats = Vec::with_capacity(dim);
    let mut words = Vec::with_capacity(dim);
    for _ in 0..dim {
        let x = rng.gen_range(lo..hi);
        words.push(codec.encode(x)?);
        floats.push(x);
    }
    Ok((floats, words))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_seed_deterministic() {
        assert_eq!(word_vectors(5, 3, 16), word_vectors(5, 3, 16));
        assert_ne!(word_vectors(5, 3, 16), word_vectors(6, 3, 16));

        let codec = FixedPointCodec::new(1024.0).unwrap();
        let (f1, w1) = float_vector(9, 32, -8.0, 8.0, &codec).unwrap();
        let (f2, w2) = float_vector(9, 32, -8.0, 8.0, &codec).unwrap();
        assert_eq!(f1, f2);
        assert_eq!(w1, w2);
        for (x, w) in f1.iter().zip(&w1) {
            assert!((codec.decode(*w) - x).abs() <= 1.0 / crate::fixedpoint::SCALE);
        }
    }

    #[test]
    fn float_mode_rejects_out_of_range_draws() {
        let codec = FixedPointCodec::new(16.0).unwrap();
        assert!(float_vector(1, 8, -64.0, -32.0, &codec).is_err());
    }
}
