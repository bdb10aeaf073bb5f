//! Index-range work splitting with ordered reduction.

use std::num::NonZeroUsize;

/// Runs `f` on every index in `0..len` using `workers` threads and returns
/// the results in index order. Chunks are contiguous, so the output does
/// not depend on the worker count.
pub fn ordered_map<T, F>(len: u64, workers: NonZeroUsize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync,
{
    let workers = workers.get().min(len.max(1) as usize);
    if workers == 1 {
        return (0..len).map(f).collect();
    }
    let chunk = len.div_ceil(workers as u64);
    std::thread::scope(|s| {
        let handles: Vec<_> = (0..workers as u64)
            .map(|w| {
                let f = &f;
                let range = (w * chunk).min(len)..((w + 1) * chunk).min(len);
                s.spawn(move || range.map(f).collect::<Vec<T>>())
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
    })
}

/// The result at the smallest index for which `f` returns `Some`, with
/// every index below it also evaluated. Workers stop early once a smaller
/// index has produced a hit.
pub fn ordered_find_map<T, F>(len: u64, workers: NonZeroUsize, f: F) -> Option<(u64, T)>
where
    T: Send,
    F: Fn(u64) -> Option<T> + Sync,
{
    use std::sync::atomic::{AtomicU64, Ordering};
    let workers = workers.get().min(len.max(1) as usize);
    if workers == 1 {
        return (0..len).find_map(|i| f(i).map(|t| (i, t)));
    }
    let best = AtomicU64::new(u64::MAX);
    let chunk = len.div_ceil(workers as u64);
    let hits: Vec<Option<(u64, T)>> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..workers as u64)
            .map(|w| {
                let (f, best) = (&f, &best);
                let range = (w * chunk).min(len)..((w + 1) * chunk).min(len);
                s.spawn(move || {
                    for i in range {
                        if i > best.load(Ordering::Relaxed) {
                            return None;
                        }
                        if let Some(t) = f(i) {
                            best.fetch_min(i, Ordering::Relaxed);
                            return Some((i, t));
                        }
                    }
                    None
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    hits.into_iter().flatten().min_by_key(|(i, _)| *i)
}
