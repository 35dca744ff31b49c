//! Data-parallel execution seam.
//!
//! Batch loops (random-trial suites, certificate replays, path sampling) go
//! through [`map`]. With the `parallel` feature enabled the work is dispatched
//! to rayon unless sequential mode is forced; without the feature the crate
//! never touches a thread pool. Results are collected in input order either
//! way, so outputs are bit-identical across modes and thread counts.

use std::sync::atomic::{AtomicBool, Ordering};

static FORCE_SEQUENTIAL: AtomicBool = AtomicBool::new(false);

/// Force sequential execution at runtime, even when built with `parallel`.
pub fn set_sequential(seq: bool) {
    FORCE_SEQUENTIAL.store(seq, Ordering::Relaxed);
}

/// True when batch loops will run sequentially.
pub fn is_sequential() -> bool {
    !cfg!(feature = "parallel") || FORCE_SEQUENTIAL.load(Ordering::Relaxed)
}

/// Configure the thread cap from the `SPECFLOW_THREADS` environment variable.
///
/// `SPECFLOW_THREADS=1` forces sequential execution; any larger value caps the
/// rayon pool (effective only before the global pool is first used).
pub fn init_from_env() {
    if let Ok(raw) = std::env::var("SPECFLOW_THREADS") {
        if let Ok(n) = raw.trim().parse::<usize>() {
            if n == 1 {
                set_sequential(true);
            } else if n > 1 {
                set_sequential(false);
                #[cfg(feature = "parallel")]
                {
                    // Ignore the error if a pool already exists.
                    let _ = rayon::ThreadPoolBuilder::new()
                        .num_threads(n)
                        .build_global();
                }
            }
        }
    }
}

/// Map `f` over `items`, in parallel when allowed, preserving input order.
pub fn map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        if !is_sequential() && items.len() > 1 {
            return items.par_iter().map(f).collect();
        }
    }
    items.iter().map(f).collect()
}

/// Map `f` over an index range, in parallel when allowed, preserving order.
pub fn map_range<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        if !is_sequential() && n > 1 {
            return (0..n).into_par_iter().map(f).collect();
        }
    }
    (0..n).map(f).collect()
}
