//! Worker-count control for independent work items.
//!
//! `POU_APPROX_THREADS` caps the worker count; `0` runs everything on the
//! calling thread. Results always come back in input order.

use rayon::prelude::*;

pub const THREADS_ENV: &str = "POU_APPROX_THREADS";

/// `None` when unset (use rayon's default pool), `Some(n)` otherwise.
pub fn worker_cap() -> Option<usize> {
    std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse().ok())
}

/// Map `f` over `items`, preserving order, honouring the worker cap.
pub fn map_ordered<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match worker_cap() {
        Some(0) | Some(1) => items.iter().map(f).collect(),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| items.par_iter().map(&f).collect()),
            Err(_) => items.iter().map(f).collect(),
        },
        None => items.par_iter().map(f).collect(),
    }
}
