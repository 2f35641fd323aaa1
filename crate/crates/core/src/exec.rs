//! Row-blocked execution helpers.
//!
//! Every kernel in the crate is written as an independent per-row closure.
//! Rows are either visited by rayon (feature `parallel`) or by a plain loop;
//! since no row reads another row's output, results are bit-identical for
//! either path and for any worker count. Reductions first produce one partial
//! sum per row and then fold the partials sequentially in row order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// How row kernels are scheduled.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    /// Plain loop over rows on the calling thread.
    Sequential,
    /// Rows distributed over the current rayon pool. Falls back to
    /// [`Execution::Sequential`] when the `parallel` feature is disabled.
    #[default]
    Parallel,
}

impl Execution {
    /// Whether rows will actually be dispatched to rayon.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

pub(crate) fn for_each_row<T, F>(exec: Execution, out: &mut [T], ncols: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        out.par_chunks_mut(ncols)
            .enumerate()
            .for_each(|(i, row)| f(i, row));
        return;
    }
    let _ = exec;
    out.chunks_mut(ncols)
        .enumerate()
        .for_each(|(i, row)| f(i, row));
}

/// Sum of `f(row)` over `0..nrows`, folded in row order.
pub(crate) fn row_sum<F>(exec: Execution, nrows: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        let partials: Vec<f64> = (0..nrows).into_par_iter().map(f).collect();
        return partials.iter().sum();
    }
    let _ = exec;
    (0..nrows).map(f).sum()
}
