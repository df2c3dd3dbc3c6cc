//! Restart execution with an optional rayon backend.
//!
//! Results are always collected in restart order and reduced sequentially, so
//! the outcome is independent of the worker count.

use crate::tol;

/// Worker policy for independent restarts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Jobs {
    /// rayon's global pool (sequential without the `parallel` feature).
    #[default]
    Auto,
    /// Exactly this many workers; 1 runs on the calling thread.
    Fixed(usize),
}

impl Jobs {
    pub fn from_count(count: Option<usize>) -> Self {
        match count {
            None | Some(0) => Jobs::Auto,
            Some(k) => Jobs::Fixed(k),
        }
    }
}

/// Evaluate `task(0..count)`, returning results in index order.
pub fn run_indexed<T, F>(count: usize, jobs: Jobs, task: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match jobs {
        Jobs::Fixed(1) => (0..count).map(task).collect(),
        _ => run_parallel(count, jobs, task),
    }
}

#[cfg(feature = "parallel")]
fn run_parallel<T, F>(count: usize, jobs: Jobs, task: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    match jobs {
        Jobs::Fixed(k) => match rayon::ThreadPoolBuilder::new().num_threads(k).build() {
            Ok(pool) => pool.install(|| (0..count).into_par_iter().map(&task).collect()),
            Err(_) => (0..count).map(task).collect(),
        },
        Jobs::Auto => (0..count).into_par_iter().map(task).collect(),
    }
}

#[cfg(not(feature = "parallel"))]
fn run_parallel<T, F>(count: usize, _jobs: Jobs, task: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..count).map(task).collect()
}

/// Index of the largest value; values within the tie tolerance of the current
/// best keep the earlier index.
pub fn best_index(values: impl IntoIterator<Item = f64>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.into_iter().enumerate() {
        match best {
            Some((_, b)) if v <= b + tol::TIE => {}
            _ => best = Some((i, v)),
        }
    }
    best.map(|(i, _)| i)
}
