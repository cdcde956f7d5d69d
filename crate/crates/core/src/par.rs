//! Data-parallel execution with a sequential fallback.
//!
//! With the `parallel` feature (on by default) an [`Executor`] with more than
//! one worker owns a rayon pool. With one worker, or without the feature,
//! every map runs as a plain sequential loop. Results are always returned in
//! input order, so callers get identical output for any worker count as long
//! as the mapped function is itself deterministic.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

pub struct Executor {
    workers: usize,
    #[cfg(feature = "parallel")]
    pool: Option<rayon::ThreadPool>,
}

impl Executor {
    pub fn sequential() -> Self {
        Self {
            workers: 1,
            #[cfg(feature = "parallel")]
            pool: None,
        }
    }

    /// Executor with `workers` threads; `0` means one per available core.
    #[cfg(feature = "parallel")]
    pub fn new(workers: usize) -> Self {
        let workers = if workers == 0 {
            std::thread::available_parallelism().map_or(1, |n| n.get())
        } else {
            workers
        };
        if workers == 1 {
            return Self::sequential();
        }
        let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build().ok();
        match pool {
            Some(pool) => Self {
                workers,
                pool: Some(pool),
            },
            None => {
                tracing::warn!(workers, "could not build thread pool, running sequentially");
                Self::sequential()
            }
        }
    }

    #[cfg(not(feature = "parallel"))]
    pub fn new(_workers: usize) -> Self {
        Self::sequential()
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    pub fn is_parallel(&self) -> bool {
        self.workers > 1
    }

    /// Maps `f` over `items`, preserving order.
    pub fn map<T, R, F>(&self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if let Some(pool) = &self.pool {
            return pool.install(|| items.par_iter().map(&f).collect());
        }
        items.iter().map(f).collect()
    }

    /// Maps `f` over `0..n`, preserving order.
    pub fn map_range<R, F>(&self, n: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if let Some(pool) = &self.pool {
            return pool.install(|| (0..n).into_par_iter().map(&f).collect());
        }
        (0..n).map(f).collect()
    }
}

impl Default for Executor {
    fn default() -> Self {
        Self::new(0)
    }
}

impl std::fmt::Debug for Executor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Executor").field("workers", &self.workers).finish()
    }
}
