//! Execution policy for the data-parallel loops (time sweeps, finite-volume
//! flux evaluation, level maps, parameter sweeps).
//!
//! With the `parallel` feature (default) [`Execution::Parallel`] dispatches to
//! rayon. Without it, both variants run sequentially, so callers never need
//! their own `cfg` switches.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Smallest index range handed to one rayon task in the per-cell loops.
#[cfg(feature = "parallel")]
const MIN_CHUNK: usize = 512;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// True when work is actually farmed out to a thread pool.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }

    pub fn map<T, U, F>(self, items: &[T], f: F) -> Vec<U>
    where
        T: Sync,
        U: Send,
        F: Fn(&T) -> U + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return items.par_iter().map(f).collect();
        }
        items.iter().map(f).collect()
    }

    pub fn map_range<U, F>(self, n: usize, f: F) -> Vec<U>
    where
        U: Send,
        F: Fn(usize) -> U + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return (0..n)
                .into_par_iter()
                .with_min_len(MIN_CHUNK)
                .map(f)
                .collect();
        }
        (0..n).map(f).collect()
    }

    /// Fill `out[i] = f(i)` in place.
    pub fn fill<U, F>(self, out: &mut [U], f: F)
    where
        U: Send,
        F: Fn(usize) -> U + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            out.par_iter_mut()
                .with_min_len(MIN_CHUNK)
                .enumerate()
                .for_each(|(i, o)| *o = f(i));
            return;
        }
        for (i, o) in out.iter_mut().enumerate() {
            *o = f(i);
        }
    }

    /// Maximum of `f(i)` over `0..n`; `f64::NEG_INFINITY` for `n == 0`.
    pub fn max_range<F>(self, n: usize, f: F) -> f64
    where
        F: Fn(usize) -> f64 + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return (0..n)
                .into_par_iter()
                .with_min_len(MIN_CHUNK)
                .map(f)
                .reduce(|| f64::NEG_INFINITY, f64::max);
        }
        (0..n).map(f).fold(f64::NEG_INFINITY, f64::max)
    }
}
