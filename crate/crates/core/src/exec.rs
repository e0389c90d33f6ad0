//! Batch execution of independent jobs (episodes, planner calls).
//!
//! With the `parallel` feature (on by default) [`map_jobs`] spreads the jobs
//! over the rayon pool; without it, it is the sequential loop. Results are
//! returned in input order either way.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

pub fn map_jobs<T, U, F>(jobs: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        jobs.into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_sequential(jobs, f)
    }
}

pub fn map_sequential<T, U, F>(jobs: Vec<T>, f: F) -> Vec<U>
where
    F: Fn(T) -> U,
{
    jobs.into_iter().map(f).collect()
}
