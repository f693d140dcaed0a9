//! Fixed-size worker pool over an indexed job list.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use anyhow::{bail, Context, Result};

pub const THREADS_VAR: &str = "AKLT_THREADS";

/// Worker count from `AKLT_THREADS`, defaulting to the available cores.
pub fn thread_count() -> Result<usize> {
    match std::env::var(THREADS_VAR) {
        Ok(raw) => {
            let n: usize = raw
                .trim()
                .parse()
                .with_context(|| format!("{THREADS_VAR}={raw:?} is not a positive integer"))?;
            if n == 0 {
                bail!("{THREADS_VAR} must be at least 1");
            }
            Ok(n)
        }
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

/// Applies `f` to every job on up to `threads` workers. Results come back in
/// job order; the first failing job (by index) determines the error.
pub fn parallel_map<T, R, F>(jobs: &[T], threads: usize, f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Result<R> + Sync,
{
    let threads = threads.clamp(1, jobs.len().max(1));
    if threads == 1 {
        return jobs.iter().map(&f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<R>>>> = Mutex::new((0..jobs.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= jobs.len() {
                    break;
                }
                let out = f(&jobs[i]);
                slots.lock().expect("worker panicked")[i] = Some(out);
            });
        }
    });
    slots
        .into_inner()
        .expect("worker panicked")
        .into_iter()
        .map(|r| r.expect("every job ran"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let jobs: Vec<u64> = (0..50).collect();
        let out = parallel_map(&jobs, 4, |&x| Ok(x * x)).unwrap();
        assert_eq!(out, jobs.iter().map(|x| x * x).collect::<Vec<_>>());
    }

    #[test]
    fn first_error_wins() {
        let jobs: Vec<u64> = (0..20).collect();
        let err = parallel_map(&jobs, 3, |&x| if x % 7 == 3 { bail!("job {x}") } else { Ok(x) }).unwrap_err();
        assert_eq!(err.to_string(), "job 3");
    }
}
