//! Deterministic parallel maps. Results are collected in index order, so the
//! output never depends on scheduling. `MUSKAT_THREADS` caps the pool size.

use std::sync::Once;

use rayon::prelude::*;

use crate::error::Result;

static INIT: Once = Once::new();

fn init_pool() {
    INIT.call_once(|| {
        if let Some(n) = std::env::var("MUSKAT_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
            // Another pool may already be installed by the host program.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
        }
    });
}

pub fn try_map<T, F>(n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    init_pool();
    (0..n).into_par_iter().map(f).collect()
}
