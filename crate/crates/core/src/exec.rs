//! Execution strategy for the data-parallel inner loops.
//!
//! With the `parallel` feature (on by default) the hot loops run on the
//! rayon global pool. Without it, or when [`Execution::Sequential`] is
//! requested, the same closures run on the calling thread. Every caller
//! reduces with order-insensitive operations, so results never depend on
//! the schedule.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Execution {
    Sequential,
    /// Falls back to sequential when built without the `parallel` feature.
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

pub(crate) fn map_slice<T, R, F>(exec: Execution, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}

pub(crate) fn map_range<R, F>(exec: Execution, range: std::ops::Range<usize>, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return range.into_par_iter().map(f).collect();
    }
    let _ = exec;
    range.map(f).collect()
}

/// Map every item and fold the results with an associative, commutative
/// `combine`.
pub(crate) fn map_reduce<T, R, F, C, I>(exec: Execution, items: &[T], identity: I, f: F, combine: C) -> R
where
    T: Sync,
    R: Send,
    I: Fn() -> R + Sync + Send,
    F: Fn(&T) -> R + Sync + Send,
    C: Fn(R, R) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return items.par_iter().map(f).reduce(&identity, &combine);
    }
    let _ = exec;
    items.iter().map(f).fold(identity(), combine)
}

pub(crate) fn count_range<F>(exec: Execution, range: std::ops::Range<u64>, pred: F) -> u64
where
    F: Fn(u64) -> bool + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return range.into_par_iter().filter(|&i| pred(i)).count() as u64;
    }
    let _ = exec;
    range.filter(|&i| pred(i)).count() as u64
}
