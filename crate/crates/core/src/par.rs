//! Trial-level data parallelism.
//!
//! With the `parallel` feature trials run on the rayon pool; without it they
//! run in order on the calling thread. Both return results indexed by trial,
//! so outputs do not depend on the worker count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `0..trials`, in parallel when the feature is enabled.
pub fn map_trials<T, F>(trials: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..trials).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_trials_seq(trials, f)
    }
}

/// Sequential reference path.
pub fn map_trials_seq<T, F>(trials: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..trials).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let a = map_trials(100, |i| i * i);
        let b = map_trials_seq(100, |i| i * i);
        assert_eq!(a, b);
    }
}
