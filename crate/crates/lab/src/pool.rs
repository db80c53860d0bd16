//! A bounded worker pool that hands results back in job order.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;
use std::thread;

/// Runs `work` on every job in `jobs` using up to `workers` threads and
/// feeds the results to `sink` in the order of `jobs`, as soon as each
/// prefix is complete. A panicking job yields `Err` with the panic message.
/// Stops early if `sink` returns an error.
pub fn run_ordered<J, T, E, W, S>(jobs: &[J], workers: usize, work: W, mut sink: S) -> Result<(), E>
where
    J: Sync,
    T: Send,
    W: Fn(&J) -> T + Sync,
    S: FnMut(&J, Result<T, String>) -> Result<(), E>,
{
    let workers = workers.clamp(1, jobs.len().max(1));
    let next = AtomicUsize::new(0);
    let stop = std::sync::atomic::AtomicBool::new(false);
    thread::scope(|scope| {
        let (tx, rx) = mpsc::channel::<(usize, Result<T, String>)>();
        for _ in 0..workers {
            let tx = tx.clone();
            let (next, stop, work) = (&next, &stop, &work);
            scope.spawn(move || loop {
                if stop.load(Ordering::Relaxed) {
                    return;
                }
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= jobs.len() {
                    return;
                }
                let out = catch_unwind(AssertUnwindSafe(|| work(&jobs[i]))).map_err(panic_message);
                if tx.send((i, out)).is_err() {
                    return;
                }
            });
        }
        drop(tx);
        let mut pending = BTreeMap::new();
        let mut emitted = 0;
        for (i, out) in rx {
            pending.insert(i, out);
            while let Some(out) = pending.remove(&emitted) {
                if let Err(e) = sink(&jobs[emitted], out) {
                    stop.store(true, Ordering::Relaxed);
                    return Err(e);
                }
                emitted += 1;
            }
        }
        Ok(())
    })
}

fn panic_message(p: Box<dyn std::any::Any + Send>) -> String {
    if let Some(s) = p.downcast_ref::<&str>() {
        s.to_string()
    } else if let Some(s) = p.downcast_ref::<String>() {
        s.clone()
    } else {
        "worker panicked".into()
    }
}
