//! Data-parallel mapping with a sequential fallback.
//!
//! With the `parallel` feature (default) blocks are mapped on the rayon
//! thread pool; without it the same helper runs sequentially. Results keep
//! the input order either way, so every caller is deterministic.

#[cfg(feature = "parallel")]
pub fn par_map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    items.into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn par_map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    F: Fn(T) -> U,
{
    items.into_iter().map(f).collect()
}
