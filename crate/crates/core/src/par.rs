//! Data-parallel helpers.
//!
//! With the `parallel` feature (default) these dispatch to rayon; without it
//! they run sequentially with identical results. Every reduction here is
//! order-independent or performed in index order, so outputs never depend on
//! the thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `0..n`, preserving index order in the output.
pub fn map_range<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Maps `f` over contiguous chunks of `0..n` and returns per-chunk results in
/// chunk order. Callers fold the results themselves so floating-point sums
/// are grouped identically regardless of scheduling.
pub fn map_chunks<R, F>(n: usize, chunk: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(std::ops::Range<usize>) -> R + Sync + Send,
{
    let chunk = chunk.max(1);
    let n_chunks = n.div_ceil(chunk);
    map_range(n_chunks, |c| {
        let start = c * chunk;
        f(start..(start + chunk).min(n))
    })
}

/// Sorts a slice with a comparator, in parallel when available.
pub fn sort_by<T, F>(v: &mut [T], cmp: F)
where
    T: Send,
    F: Fn(&T, &T) -> std::cmp::Ordering + Sync,
{
    #[cfg(feature = "parallel")]
    {
        v.par_sort_by(cmp)
    }
    #[cfg(not(feature = "parallel"))]
    {
        v.sort_by(cmp)
    }
}

/// Whether this build runs data-parallel loops on a thread pool.
pub fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
