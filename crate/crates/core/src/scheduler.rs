//! Bounded worker pool over a dependency DAG.

use std::collections::VecDeque;
use std::sync::{Arc, Condvar, Mutex};

use crate::error::{Error, Result};

struct State<T> {
    ready: VecDeque<usize>,
    pending: Vec<usize>,
    results: Vec<Option<Arc<T>>>,
    finished: usize,
    failure: Option<(usize, Error)>,
}

/// Runs `work(job, child_results)` for every job once all of `deps[job]`
/// have finished, with at most `workers` jobs in flight. Children's results
/// are passed in the order listed in `deps`.
///
/// On failure no new jobs start; the error of the first failed job is
/// returned along with its id.
pub fn execute<T, F>(deps: &[Vec<usize>], workers: usize, work: F) -> std::result::Result<Vec<Arc<T>>, (usize, Error)>
where
    T: Send + Sync,
    F: Fn(usize, &[Arc<T>]) -> Result<T> + Sync,
{
    let n = deps.len();
    let mut dependents: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (job, ds) in deps.iter().enumerate() {
        for &d in ds {
            assert!(d < n, "job {job} depends on unknown job {d}");
            dependents[d].push(job);
        }
    }
    let pending: Vec<usize> = deps.iter().map(Vec::len).collect();
    let ready: VecDeque<usize> = (0..n).filter(|&j| pending[j] == 0).collect();
    let state = Mutex::new(State {
        ready,
        pending,
        results: (0..n).map(|_| None).collect(),
        finished: 0,
        failure: None,
    });
    let wake = Condvar::new();

    let worker = || loop {
        let (job, inputs) = {
            let mut st = state.lock().unwrap();
            loop {
                if st.failure.is_some() || st.finished == n {
                    return;
                }
                if let Some(job) = st.ready.pop_front() {
                    let inputs: Vec<Arc<T>> =
                        deps[job].iter().map(|&d| st.results[d].clone().expect("dependency finished")).collect();
                    break (job, inputs);
                }
                st = wake.wait(st).unwrap();
            }
        };
        let outcome = work(job, &inputs);
        let mut st = state.lock().unwrap();
        match outcome {
            Ok(value) => {
                st.results[job] = Some(Arc::new(value));
                st.finished += 1;
                for &parent in &dependents[job] {
                    st.pending[parent] -= 1;
                    if st.pending[parent] == 0 {
                        st.ready.push_back(parent);
                    }
                }
            }
            Err(e) => {
                if st.failure.is_none() {
                    st.failure = Some((job, e));
                }
            }
        }
        wake.notify_all();
    };

    let workers = workers.clamp(1, n.max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(worker);
        }
    });

    let st = state.into_inner().unwrap();
    if let Some(f) = st.failure {
        return Err(f);
    }
    Ok(st.results.into_iter().map(|r| r.expect("all jobs finished")).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicUsize, Ordering};

    #[test]
    fn sums_a_tree() {
        // leaves 0..4, 4 = 0+1, 5 = 2+3, 6 = 4+5
        let deps = vec![vec![], vec![], vec![], vec![], vec![0, 1], vec![2, 3], vec![4, 5]];
        for workers in [1, 2, 8] {
            let out = execute(&deps, workers, |job, inputs: &[Arc<u64>]| {
                Ok(if inputs.is_empty() { job as u64 + 1 } else { inputs.iter().map(|x| **x).sum() })
            })
            .unwrap();
            assert_eq!(*out[6], 10);
        }
    }

    #[test]
    fn respects_worker_bound_and_runs_each_once() {
        let deps: Vec<Vec<usize>> = (0..32).map(|_| vec![]).collect();
        let active = AtomicUsize::new(0);
        let peak = AtomicUsize::new(0);
        let calls = AtomicUsize::new(0);
        execute(&deps, 3, |_, _: &[Arc<()>]| {
            let now = active.fetch_add(1, Ordering::SeqCst) + 1;
            peak.fetch_max(now, Ordering::SeqCst);
            calls.fetch_add(1, Ordering::SeqCst);
            std::thread::sleep(std::time::Duration::from_millis(2));
            active.fetch_sub(1, Ordering::SeqCst);
            Ok(())
        })
        .unwrap();
        assert!(peak.load(Ordering::SeqCst) <= 3);
        assert_eq!(calls.load(Ordering::SeqCst), 32);
    }

    #[test]
    fn failure_stops_dependents() {
        let deps = vec![vec![], vec![0], vec![1]];
        let err = execute(&deps, 2, |job, _: &[Arc<()>]| {
            if job == 1 {
                Err(Error::Internal("boom".into()))
            } else {
                Ok(())
            }
        })
        .unwrap_err();
        assert_eq!(err.0, 1);
    }

    #[test]
    fn empty_dag() {
        let out = execute(&[], 4, |_, _: &[Arc<()>]| Ok(())).unwrap();
        assert!(out.is_empty());
    }
}
