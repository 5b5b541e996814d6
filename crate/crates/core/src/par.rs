//! Deterministic chunked reductions.
//!
//! Index ranges are cut into fixed-size chunks; each chunk is summed in index
//! order and the chunk totals are then added in chunk order. The result is
//! bit-identical whether the chunks run on the rayon pool or sequentially,
//! and independent of the worker count.

use std::ops::Add;

/// How a reduction distributes its chunks.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Strategy {
    #[cfg_attr(not(feature = "parallel"), default)]
    Sequential,
    #[cfg(feature = "parallel")]
    #[default]
    Parallel,
}

pub const DEFAULT_CHUNK: usize = 256;

/// `sum_{i in 0..n} f(i)` with the chunked reduction order described above.
pub fn chunked_sum<T, F>(strategy: Strategy, n: usize, chunk: usize, zero: T, f: F) -> T
where
    T: Copy + Send + Sync + Add<Output = T>,
    F: Fn(usize) -> T + Sync + Send,
{
    let chunk = chunk.max(1);
    let n_chunks = n.div_ceil(chunk);
    let chunk_sum = |c: usize| {
        let lo = c * chunk;
        let hi = (lo + chunk).min(n);
        (lo..hi).fold(zero, |acc, i| acc + f(i))
    };
    let partials: Vec<T> = map_indices(strategy, n_chunks, chunk_sum);
    partials.into_iter().fold(zero, |acc, x| acc + x)
}

/// `(0..n).map(f).collect()`, distributed per `strategy`; output order is index order.
pub fn map_indices<T, F>(strategy: Strategy, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match strategy {
        Strategy::Sequential => (0..n).map(f).collect(),
        #[cfg(feature = "parallel")]
        Strategy::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
    }
}

/// Fallible variant of [`map_indices`]; returns the first error in index order.
pub fn try_map_indices<T, E, F>(strategy: Strategy, n: usize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> Result<T, E> + Sync + Send,
{
    map_indices(strategy, n, f).into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunked_sum_matches_plain_sum() {
        let f = |i: usize| (i as f64).sqrt();
        let plain: f64 = (0..1000).map(f).sum();
        let chunked = chunked_sum(Strategy::Sequential, 1000, 7, 0.0, f);
        assert!((plain - chunked).abs() < 1e-9);
        assert_eq!(chunked_sum(Strategy::Sequential, 0, 7, 0.0, f), 0.0);
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn parallel_is_bit_identical_to_sequential() {
        let f = |i: usize| 1.0 / (1.0 + i as f64);
        let s = chunked_sum(Strategy::Sequential, 100_003, 64, 0.0, f);
        let p = chunked_sum(Strategy::Parallel, 100_003, 64, 0.0, f);
        assert_eq!(s.to_bits(), p.to_bits());
    }
}
