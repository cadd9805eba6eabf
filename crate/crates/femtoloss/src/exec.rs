//! Trial fan-out. With the `parallel` feature (default) independent tasks
//! run on the rayon pool; without it the same API runs sequentially.
//! Results always come back in task order, so downstream reductions and CSV
//! output are byte-identical for any thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `f` over `0..n`, collecting in index order.
pub fn map_tasks<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        map_tasks_par(n, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_tasks_seq(n, f)
    }
}

/// Sequential fan-out; always available (benchmarked against the parallel path).
pub fn map_tasks_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Rayon fan-out; `collect` on an indexed parallel iterator preserves order.
#[cfg(feature = "parallel")]
pub fn map_tasks_par<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

/// Whether this build fans tasks out across threads.
pub fn parallelism_enabled() -> bool {
    cfg!(feature = "parallel")
}

/// Size the global thread pool (no-op without the `parallel` feature, or if
/// a pool already exists — e.g. when called twice).
pub fn configure_threads(n: usize) {
    #[cfg(feature = "parallel")]
    {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = n;
    }
}
