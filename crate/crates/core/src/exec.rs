//! Ordered fan-out over independent work items.
//!
//! With the `parallel` feature the items are distributed over a rayon pool;
//! without it every variant runs sequentially. Results always come back in
//! input order so reductions downstream stay deterministic.

/// How a batch of independent items is processed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Parallel over the global rayon pool.
    #[default]
    Parallel,
    /// Parallel over a dedicated pool of `n` workers; bounds in-flight
    /// backend requests.
    Bounded(usize),
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && !matches!(self, Execution::Sequential)
    }
}

/// Maps `f` over `items`, preserving order.
pub fn map_ordered<T, R, F>(items: &[T], exec: Execution, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        match exec {
            Execution::Sequential => items.iter().map(f).collect(),
            Execution::Parallel => items.par_iter().map(f).collect(),
            Execution::Bounded(n) => match rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
                Ok(pool) => pool.install(|| items.par_iter().map(&f).collect()),
                Err(err) => {
                    log::warn!("could not build a {n}-thread pool ({err}); running sequentially");
                    items.iter().map(f).collect()
                }
            },
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = exec;
        items.iter().map(f).collect()
    }
}
