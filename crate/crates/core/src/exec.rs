//! Sequential / data-parallel execution.
//!
//! All parallel work in the crate goes through these helpers. Results are
//! always collected in index order, so a computation produces the same bits
//! under [`ExecMode::Sequential`] and [`ExecMode::Parallel`] and for any
//! thread-pool size. Without the `parallel` feature the parallel mode runs
//! sequentially.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExecMode {
    Sequential,
    #[default]
    Parallel,
}

impl ExecMode {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == ExecMode::Parallel
    }
}

/// Evaluate `f(0..n)` and collect the results in index order.
pub fn map_indexed<T, F>(mode: ExecMode, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = mode;
    (0..n).map(f).collect()
}

/// Like [`map_indexed`] but short-circuits on the first error (by index order
/// of the collected results, not by completion time).
pub fn try_map_indexed<T, E, F>(mode: ExecMode, n: usize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> Result<T, E> + Sync + Send,
{
    map_indexed(mode, n, f).into_iter().collect()
}

/// Apply `f(row_index, row)` to every `cols`-wide row of `data`.
pub fn for_each_row<T, F>(mode: ExecMode, data: &mut [T], cols: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        use rayon::prelude::*;
        data.par_chunks_mut(cols)
            .enumerate()
            .for_each(|(r, row)| f(r, row));
        return;
    }
    let _ = mode;
    data.chunks_mut(cols)
        .enumerate()
        .for_each(|(r, row)| f(r, row));
}
