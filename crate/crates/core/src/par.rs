//! Deterministic parallel map over an index range.

use rayon::prelude::*;

/// Worker count from `MESHBIAS_WORKERS`, else the available parallelism.
pub fn default_workers() -> usize {
    std::env::var("MESHBIAS_WORKERS")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .filter(|&n: &usize| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// `(0..n).map(f)` evaluated on `workers` threads, results in index order.
///
/// `workers == 1` runs on the calling thread, which is handy for debugging.
pub fn map_indexed<T, F>(workers: usize, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    if workers <= 1 || n <= 1 {
        return (0..n).map(f).collect();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(|| (0..n).into_par_iter().map(&f).collect()),
        Err(_) => (0..n).map(f).collect(),
    }
}
