//! Execution strategy for the data-parallel inner loops.
//!
//! Every hot loop that is parallel over points or blocks goes through the
//! helpers here. Without the `parallel` feature, [`Execution::Parallel`]
//! silently runs sequentially.

use ndarray::{ArrayViewMut1, ArrayViewMut2, Axis};
use serde::{Deserialize, Serialize};

/// Work below this many rows stays on the calling thread.
pub const PAR_MIN_ROWS: usize = 2048;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// True when this strategy will actually fan out to the thread pool.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }

    pub(crate) fn fan_out(self, rows: usize) -> bool {
        self.is_parallel() && rows >= PAR_MIN_ROWS
    }
}

/// Maps `f` over `0..n` and collects the results in index order.
pub fn map_indices<T, F>(exec: Execution, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() && n > 1 {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}

/// Applies `f(row_index, row)` to every row of `arr`.
pub fn for_each_row_mut<F>(exec: Execution, mut arr: ArrayViewMut2<'_, f64>, f: F)
where
    F: Fn(usize, ArrayViewMut1<'_, f64>) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.fan_out(arr.nrows()) {
        use ndarray::parallel::prelude::*;
        arr.axis_iter_mut(Axis(0))
            .into_par_iter()
            .enumerate()
            .for_each(|(i, row)| f(i, row));
        return;
    }
    let _ = exec;
    for (i, row) in arr.axis_iter_mut(Axis(0)).enumerate() {
        f(i, row);
    }
}

/// Applies `f(col_index, col)` to every column of `arr`.
pub fn for_each_column_mut<F>(exec: Execution, mut arr: ArrayViewMut2<'_, f64>, f: F)
where
    F: Fn(usize, ArrayViewMut1<'_, f64>) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.fan_out(arr.ncols()) {
        use ndarray::parallel::prelude::*;
        arr.axis_iter_mut(Axis(1))
            .into_par_iter()
            .enumerate()
            .for_each(|(l, col)| f(l, col));
        return;
    }
    let _ = exec;
    for (l, col) in arr.axis_iter_mut(Axis(1)).enumerate() {
        f(l, col);
    }
}

/// Sum over `0..n` of `f(i)`, in parallel when worthwhile.
pub fn sum_indices<F>(exec: Execution, n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.fan_out(n) {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).sum();
    }
    let _ = exec;
    (0..n).map(f).sum()
}
