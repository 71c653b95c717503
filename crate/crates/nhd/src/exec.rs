//! Work distribution for grid sweeps.
//!
//! [`map`] fans independent tasks out to the rayon pool when the `parallel`
//! feature is enabled and degrades to plain iteration otherwise; [`map_seq`]
//! is always sequential and exists so benchmarks can compare the two paths.
//! Both preserve input order, so callers see identical output either way.

/// Map `f` over `items`, in parallel when available.
#[cfg(feature = "parallel")]
pub fn map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    items.into_par_iter().map(f).collect()
}

/// Map `f` over `items`, in parallel when available.
#[cfg(not(feature = "parallel"))]
pub fn map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    F: Fn(T) -> U,
{
    items.into_iter().map(f).collect()
}

/// Sequential reference path; used by benchmarks and tiny sweeps.
pub fn map_seq<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    F: Fn(T) -> U,
{
    items.into_iter().map(f).collect()
}

/// Cap the worker pool. `None` leaves the default (one worker per core).
///
/// Must be called before the first parallel sweep; later calls are ignored
/// because the global pool can only be built once.
pub fn configure_threads(limit: Option<usize>) {
    #[cfg(feature = "parallel")]
    if let Some(n) = limit {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    #[cfg(not(feature = "parallel"))]
    let _ = limit;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_and_sequential_agree() {
        let xs: Vec<u64> = (0..1000).collect();
        let par = map(xs.clone(), |x| x * x + 1);
        let seq = map_seq(xs, |x| x * x + 1);
        assert_eq!(par, seq);
    }
}
