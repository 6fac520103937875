//! Opt-in parallelism. Everything is sequential until [`set_threads`] raises
//! the thread budget; results stay deterministic up to floating-point
//! reassociation because work is split into fixed row blocks.

use std::sync::atomic::{AtomicUsize, Ordering};

static THREADS: AtomicUsize = AtomicUsize::new(1);

/// Sets the thread budget used by large matrix products and by cold-start
/// solution-path fan-out. A value of 1 (the default) disables parallelism.
pub fn set_threads(n: usize) {
    let n = n.max(1);
    THREADS.store(n, Ordering::Relaxed);
    if n > 1 {
        // Best effort: the global pool can only be sized once per process.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

/// Current thread budget.
pub fn threads() -> usize {
    THREADS.load(Ordering::Relaxed)
}
