//! Deterministic bulk execution, parallel when the `parallel` feature is on.
//!
//! Searches over expansion streams and candidate enumerations are expressed
//! as "first match in enumeration order" over batches. The parallel path
//! fans each batch out over rayon and reduces with `find_first`, so the
//! result is identical to the sequential scan regardless of worker count.
//! [`set_sequential`] forces the sequential path at runtime (the CLI maps
//! `--jobs 1` onto it); without the `parallel` feature everything is
//! sequential.

use std::sync::atomic::{AtomicBool, Ordering};

static FORCE_SEQUENTIAL: AtomicBool = AtomicBool::new(false);

/// Force the sequential path even when the `parallel` feature is enabled.
pub fn set_sequential(seq: bool) {
    FORCE_SEQUENTIAL.store(seq, Ordering::Relaxed);
}

/// Configure worker count: `1` forces the sequential path, `0` keeps the
/// default pool, anything else sizes the global pool (first caller wins).
pub fn configure_jobs(jobs: usize) {
    if jobs == 1 {
        set_sequential(true);
        return;
    }
    set_sequential(false);
    #[cfg(feature = "parallel")]
    if jobs > 1 {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
}

pub fn is_sequential() -> bool {
    cfg!(not(feature = "parallel")) || FORCE_SEQUENTIAL.load(Ordering::Relaxed)
}

/// Number of items drawn from a stream per parallel round.
pub const BATCH: usize = 256;

/// First `f(item)` that is `Some`, in the order of `items`.
pub fn find_first_map<T, U, F>(items: Vec<T>, f: F) -> Option<U>
where
    T: Send + Sync,
    U: Send,
    F: Fn(&T) -> Option<U> + Sync,
{
    #[cfg(feature = "parallel")]
    {
        if !is_sequential() {
            use rayon::prelude::*;
            return items.par_iter().find_map_first(|t| f(t));
        }
    }
    items.iter().find_map(|t| f(t))
}

/// Scan a stream in batches, returning the first match in stream order.
pub fn find_first_in_stream<T, U, F>(
    stream: impl Iterator<Item = T>,
    f: F,
) -> Option<U>
where
    T: Send + Sync,
    U: Send,
    F: Fn(&T) -> Option<U> + Sync,
{
    let mut stream = stream.peekable();
    while stream.peek().is_some() {
        let batch: Vec<T> = stream.by_ref().take(BATCH).collect();
        if let Some(hit) = find_first_map(batch, &f) {
            return Some(hit);
        }
    }
    None
}

/// Map tasks to result lists and concatenate in task order.
pub fn flat_map_ordered<T, U, F>(tasks: Vec<T>, f: F) -> Vec<U>
where
    T: Send + Sync,
    U: Send,
    F: Fn(&T) -> Vec<U> + Sync,
{
    #[cfg(feature = "parallel")]
    {
        if !is_sequential() {
            use rayon::prelude::*;
            return tasks.par_iter().map(|t| f(t)).collect::<Vec<_>>().into_iter().flatten().collect();
        }
    }
    tasks.iter().flat_map(|t| f(t)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn find_first_is_in_stream_order() {
        let hits = find_first_in_stream((0..10_000).map(|i| i * 3), |&x| {
            if x % 7 == 0 && x > 0 {
                Some(x)
            } else {
                None
            }
        });
        assert_eq!(hits, Some(21));
    }

    #[test]
    fn ordered_flat_map_preserves_task_order() {
        let out = flat_map_ordered((0..100).collect(), |&i| vec![i, i]);
        let expect: Vec<i32> = (0..100).flat_map(|i| vec![i, i]).collect();
        assert_eq!(out, expect);
    }
}
