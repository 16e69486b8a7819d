//! Thin switch between rayon and sequential execution.
//!
//! Reductions always merge fixed-size chunks in index order, so results are
//! bit-identical regardless of thread count or whether the `parallel`
//! feature is enabled.

use std::ops::Range;

#[cfg(feature = "parallel")]
pub(crate) fn map_indexed<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_indexed<U, F>(n: usize, f: F) -> Vec<U>
where
    F: Fn(usize) -> U,
{
    (0..n).map(f).collect()
}

fn chunk_ranges(n: usize, chunk: usize) -> Vec<Range<usize>> {
    let chunk = chunk.max(1);
    let mut out = Vec::with_capacity(n / chunk + 1);
    let mut lo = 0;
    while lo < n {
        let hi = (lo + chunk).min(n);
        out.push(lo..hi);
        lo = hi;
    }
    out
}

/// Map fixed index chunks to partial results, in order. The caller merges
/// the partials sequentially, which pins the floating-point summation order.
#[cfg(feature = "parallel")]
pub(crate) fn chunked_partials<A, F>(n: usize, chunk: usize, f: F) -> Vec<A>
where
    A: Send,
    F: Fn(Range<usize>) -> A + Sync + Send,
{
    use rayon::prelude::*;
    chunk_ranges(n, chunk).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn chunked_partials<A, F>(n: usize, chunk: usize, f: F) -> Vec<A>
where
    F: Fn(Range<usize>) -> A,
{
    chunk_ranges(n, chunk).into_iter().map(f).collect()
}

/// `true` when this build executes scans on rayon.
#[allow(dead_code)]
pub fn parallel_enabled() -> bool {
    cfg!(feature = "parallel")
}
