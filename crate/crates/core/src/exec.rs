//! Deterministic data-parallel execution helpers.
//!
//! Every reduction in this crate runs over fixed-size index chunks and folds
//! the per-chunk partials in ascending chunk order. The chunk boundaries do
//! not depend on the worker count, so results are bitwise identical between
//! the rayon build, the sequential build, and any thread-pool size.

use std::ops::Range;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Fixed chunk length for deterministic reductions.
pub const CHUNK: usize = 4096;

/// Execution strategy. The public API dispatches on the crate feature; the
/// explicit variants exist so benches and determinism tests can run both.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exec {
    Serial,
    #[cfg(feature = "parallel")]
    Parallel,
}

/// Strategy selected by the crate features.
pub fn default_exec() -> Exec {
    #[cfg(feature = "parallel")]
    {
        Exec::Parallel
    }
    #[cfg(not(feature = "parallel"))]
    {
        Exec::Serial
    }
}

fn chunk_ranges(n: usize) -> Vec<Range<usize>> {
    (0..n).step_by(CHUNK).map(|s| s..(s + CHUNK).min(n)).collect()
}

/// Map fixed index chunks to partial values, returned in ascending chunk order.
pub fn map_chunks_with<A, F>(exec: Exec, n: usize, f: F) -> Vec<A>
where
    A: Send,
    F: Fn(Range<usize>) -> A + Sync + Send,
{
    let ranges = chunk_ranges(n);
    match exec {
        Exec::Serial => ranges.into_iter().map(f).collect(),
        #[cfg(feature = "parallel")]
        Exec::Parallel => ranges.into_par_iter().map(f).collect(),
    }
}

/// Deterministic chunked sum of `term(i)` for i in 0..n.
pub fn sum_indexed_with<F>(exec: Exec, n: usize, term: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    map_chunks_with(exec, n, |r| {
        let mut s = 0.0;
        for i in r {
            s += term(i);
        }
        s
    })
    .into_iter()
    .fold(0.0, |a, b| a + b)
}

/// Deterministic chunked sum using the feature-selected strategy.
pub fn sum_indexed<F>(n: usize, term: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    sum_indexed_with(default_exec(), n, term)
}

/// Deterministic chunked maximum of `term(i)`; returns f64::NEG_INFINITY for n = 0.
pub fn max_indexed<F>(n: usize, term: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    map_chunks_with(default_exec(), n, |r| {
        let mut m = f64::NEG_INFINITY;
        for i in r {
            m = m.max(term(i));
        }
        m
    })
    .into_iter()
    .fold(f64::NEG_INFINITY, f64::max)
}

/// Apply an independent per-element update to a slice.
pub fn for_each_indexed_mut<T, F>(items: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize, &mut T) + Sync,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter_mut().enumerate().for_each(|(i, t)| f(i, t));
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter_mut().enumerate().for_each(|(i, t)| f(i, t));
    }
}
