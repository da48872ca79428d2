//! Replicate fan-out with results returned in replicate order.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Evaluates `f(0), …, f(count−1)` on the current rayon pool and returns the
/// results in index order. Aggregating the returned vector sequentially gives
/// the same bits for any pool size.
pub fn map_replicates<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    (0..count as u64).into_par_iter().map(f).collect()
}

/// Runs `op` inside a dedicated pool of `threads` workers.
pub fn with_threads<T, OP>(threads: usize, op: OP) -> Result<T>
where
    T: Send,
    OP: FnOnce() -> T + Send,
{
    if threads == 0 {
        return Err(Error::invalid("thread count must be at least 1"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::invalid(format!("cannot build thread pool: {e}")))?;
    Ok(pool.install(op))
}
