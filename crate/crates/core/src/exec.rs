//! Batch executor. Work is cut into fixed-size batches whose results are
//! merged in batch order, so the numbers do not depend on how many threads
//! ran them.

use std::ops::Range;

/// Runs independent batches, on a rayon pool when the `parallel` feature
/// is on and more than one worker is requested, sequentially otherwise.
pub struct Executor {
    workers: usize,
    #[cfg(feature = "parallel")]
    pool: Option<rayon::ThreadPool>,
}

impl std::fmt::Debug for Executor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Executor").field("workers", &self.workers).finish()
    }
}

impl Executor {
    pub fn sequential() -> Self {
        Executor {
            workers: 1,
            #[cfg(feature = "parallel")]
            pool: None,
        }
    }

    /// `workers == 0` means one per available core.
    pub fn new(workers: usize) -> Self {
        let workers = if workers == 0 { std::thread::available_parallelism().map_or(1, |n| n.get()) } else { workers };
        if workers <= 1 {
            return Self::sequential();
        }
        #[cfg(feature = "parallel")]
        {
            match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
                Ok(pool) => Executor { workers, pool: Some(pool) },
                Err(_) => Self::sequential(),
            }
        }
        #[cfg(not(feature = "parallel"))]
        Self::sequential()
    }

    /// Worker threads actually used.
    pub fn workers(&self) -> usize {
        self.workers
    }

    /// `f(b)` for every batch index in `batches`, returned in index order.
    pub fn map<T, F>(&self, batches: Range<u64>, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if let Some(pool) = &self.pool {
            use rayon::prelude::*;
            return pool.install(|| batches.into_par_iter().map(&f).collect());
        }
        batches.map(f).collect()
    }
}

impl Default for Executor {
    fn default() -> Self {
        Self::sequential()
    }
}
