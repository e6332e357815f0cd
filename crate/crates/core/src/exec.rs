//! Execution strategy: data-parallel fan-out with a sequential fallback.
//!
//! Every parallel site in the workbench goes through these helpers so that
//! results are reproducible regardless of thread count: tasks are indexed,
//! mapped independently, and merged in index order.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Sequential,
    /// Rayon work-stealing when the `parallel` feature is enabled; silently
    /// equivalent to `Sequential` otherwise.
    Parallel,
}

impl Default for Strategy {
    fn default() -> Self {
        Strategy::Parallel
    }
}

/// Map `0..n` and collect results in index order.
pub fn map_indexed<R, F>(strategy: Strategy, n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if strategy == Strategy::Parallel {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).collect();
        }
    }
    let _ = strategy;
    (0..n).map(f).collect()
}

/// Map `0..n` and fold the results in index order. The fold itself is
/// sequential, so any merge function yields deterministic output.
pub fn map_fold_indexed<R, A, F, G>(strategy: Strategy, n: usize, map: F, init: A, fold: G) -> A
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
    G: FnMut(A, R) -> A,
{
    map_indexed(strategy, n, map).into_iter().fold(init, fold)
}

/// Chunked variant: splits `0..n` into at most `tasks` contiguous ranges.
/// Used when per-item closures are too fine-grained.
pub fn map_ranges<R, F>(strategy: Strategy, n: usize, tasks: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(std::ops::Range<usize>) -> R + Sync + Send,
{
    let tasks = tasks.clamp(1, n.max(1));
    let chunk = n.div_ceil(tasks);
    let ranges: Vec<_> = (0..tasks)
        .map(|t| (t * chunk).min(n)..((t + 1) * chunk).min(n))
        .filter(|r| !r.is_empty())
        .collect();
    map_indexed(strategy, ranges.len(), |i| f(ranges[i].clone()))
}

/// Default task count for chunked fan-out.
pub fn default_tasks() -> usize {
    #[cfg(feature = "parallel")]
    {
        return rayon::current_num_threads() * 4;
    }
    #[allow(unreachable_code)]
    4
}
