//! Sequential or data-parallel execution of independent indexed jobs.

use serde::{Deserialize, Serialize};

/// How independent jobs (Monte Carlo trials, sampled pairs, sweeps) are run.
///
/// Results are always collected in index order, so both modes give
/// bitwise-identical output. Without the `parallel` feature, `Parallel`
/// falls back to sequential execution.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// Whether jobs will actually run on multiple threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// `(0..n).map(f)` in index order, on the rayon pool when requested.
pub fn map_indexed<T, F>(n: usize, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}
