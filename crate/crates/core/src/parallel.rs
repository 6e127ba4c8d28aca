//! Data-parallel helpers with a sequential fallback.
//!
//! The heavy loops — per-client report assembly, per-ciphertext threshold
//! combines, mask re-expansion — are all independent maps or folds, so they
//! funnel through these two functions. With the default `parallel` feature
//! they run on rayon; without it they run on plain iterators. Bounds are the
//! same either way, so the public API is identical under both builds, and
//! results are order-preserving and bit-identical by construction.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

pub fn map_collect<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Like [`map_collect`], but `f` gets mutable access to each item — the shape
/// for per-client work that updates a session's derived-key caches in place.
pub fn map_collect_mut<T, U, F>(items: &mut [T], f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(&mut T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter_mut().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter_mut().map(f).collect()
    }
}

/// Fold with an associative, commutative `reduce`; each worker folds a chunk
/// from `init` and partial accumulators are merged.
pub fn fold_reduce<T, A, I, F, R>(items: &[T], init: I, fold: F, reduce: R) -> A
where
    T: Sync,
    A: Send,
    I: Fn() -> A + Sync + Send,
    F: Fn(A, &T) -> A + Sync + Send,
    R: Fn(A, A) -> A + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items
            .par_iter()
            .fold(&init, &fold)
            .reduce(&init, &reduce)
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = &reduce;
        items.iter().fold(init(), fold)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_preserves_order() {
        let xs: Vec<u64> = (0..1000).collect();
        let ys = map_collect(&xs, |x| x * 2);
        assert_eq!(ys, (0..1000).map(|x| x * 2).collect::<Vec<_>>());
    }

    #[test]
    fn fold_reduce_matches_sequential_sum() {
        let xs: Vec<u32> = (0..10_000).collect();
        let total = fold_reduce(
            &xs,
            || 0u64,
            |acc, &x| acc + x as u64,
            |a, b| a + b,
        );
        assert_eq!(total, xs.iter().map(|&x| x as u64).sum::<u64>());
    }

    #[test]
    fn fold_reduce_merges_vector_accumulators() {
        // The shape used for mask recombination: componentwise wrapping sums.
        let seeds: Vec<u32> = (1..=64).collect();
        let acc = fold_reduce(
            &seeds,
            || vec![0u32; 8],
            |mut acc, &s| {
                for (k, a) in acc.iter_mut().enumerate() {
                    *a = a.wrapping_add(s.wrapping_mul(k as u32 + 1));
                }
                acc
            },
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x = x.wrapping_add(y);
                }
                a
            },
        );
        let sum: u32 = (1..=64).sum();
        let expect: Vec<u32> = (1..=8).map(|k| sum * k).collect();
        assert_eq!(acc, expect);
    }
}
