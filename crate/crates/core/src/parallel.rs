//! Order-preserving parallel map with an optional thread cap.
//!
//! `CIRCUITFORGE_THREADS` limits the worker count; unset or invalid values
//! use the global rayon pool.

use rayon::prelude::*;

pub const THREADS_ENV: &str = "CIRCUITFORGE_THREADS";

pub fn thread_limit() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

/// `items.map(f)` evaluated concurrently; results are in input order.
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    let run = || items.par_iter().map(&f).collect();
    match thread_limit().and_then(|n| rayon::ThreadPoolBuilder::new().num_threads(n).build().ok()) {
        Some(pool) => pool.install(run),
        None => run(),
    }
}
