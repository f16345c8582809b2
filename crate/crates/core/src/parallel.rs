//! Batch-level data parallelism.
//!
//! Monte Carlo loops are cut into fixed-size batches; batch `i` always draws
//! from replica stream `i`, and results come back in batch order. With the
//! `parallel` feature the batches run on the rayon pool, otherwise (or with
//! [`Execution::Sequential`]) they run in a plain loop. Both paths return
//! identical vectors.

use serde::{Deserialize, Serialize};

/// Samples per batch. Part of the reproducibility contract: changing it
/// changes which stream each sample comes from.
pub const BATCH_SIZE: u64 = 8192;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Execution {
    Sequential,
    /// Rayon when the `parallel` feature is compiled in; sequential otherwise.
    #[default]
    Parallel,
}

impl Execution {
    /// Whether this mode will actually fan out to worker threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Batch {
    pub index: u64,
    pub start: u64,
    pub len: u64,
}

pub fn batches(n: u64) -> impl Iterator<Item = Batch> {
    let count = n.div_ceil(BATCH_SIZE);
    (0..count).map(move |index| {
        let start = index * BATCH_SIZE;
        Batch {
            index,
            start,
            len: BATCH_SIZE.min(n - start),
        }
    })
}

/// Run `f` over the batches of `n` samples and collect results in batch order.
pub fn map_batches<T, F>(n: u64, execution: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(Batch) -> T + Sync + Send,
{
    let all: Vec<Batch> = batches(n).collect();
    map_items(&all, execution, |b| f(*b))
}

/// Order-preserving map over a slice of independent work items.
pub fn map_items<I, T, F>(items: &[I], execution: Execution, f: F) -> Vec<T>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if execution == Execution::Parallel {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    let _ = execution;
    items.iter().map(f).collect()
}

/// Size the global worker pool. `0` keeps rayon's default (one per core).
/// Without the `parallel` feature this is a no-op.
pub fn configure_threads(threads: usize) -> Result<(), String> {
    #[cfg(feature = "parallel")]
    if threads > 0 {
        return rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| e.to_string());
    }
    let _ = threads;
    Ok(())
}
