//! Execution of independent tasks (replications, sweep points).
//!
//! Results always come back in task order, so output does not depend on the
//! execution mode or thread count.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Data-parallel over tasks. `jobs = 0` uses every available core.
    /// Without the `parallel` feature this runs sequentially.
    Parallel { jobs: usize },
}

impl Default for Execution {
    fn default() -> Self {
        Execution::Parallel { jobs: 0 }
    }
}

impl Execution {
    /// `--jobs` semantics: 1 is sequential, 0 is all cores.
    pub fn with_jobs(jobs: usize) -> Self {
        if jobs == 1 {
            Execution::Sequential
        } else {
            Execution::Parallel { jobs }
        }
    }

    pub fn map<T, F>(&self, tasks: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match *self {
            Execution::Sequential => (0..tasks).map(f).collect(),
            Execution::Parallel { jobs } => parallel_map(tasks, jobs, f),
        }
    }
}

#[cfg(feature = "parallel")]
fn parallel_map<T, F>(tasks: usize, jobs: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;

    if jobs == 0 {
        return (0..tasks).into_par_iter().map(f).collect();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(pool) => pool.install(|| (0..tasks).into_par_iter().map(&f).collect()),
        Err(_) => (0..tasks).map(f).collect(),
    }
}

#[cfg(not(feature = "parallel"))]
fn parallel_map<T, F>(tasks: usize, _jobs: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..tasks).map(f).collect()
}
