//! Data-parallel map helpers with a sequential fallback.
//!
//! With the `parallel` feature enabled (the default) the `*_par` entry points
//! fan out over the rayon global pool; without it they degrade to the
//! sequential loop. Results are always collected in input order and all
//! reductions happen sequentially afterwards, so the worker count never
//! affects the output bytes.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `f` over `0..n`, in parallel when requested and compiled in.
pub fn map_range<U, F>(n: usize, parallel: bool, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel {
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = parallel;
    (0..n).map(f).collect()
}

/// Always-sequential variant, kept as a separate entry point so benchmarks
/// can compare both paths in one binary.
pub fn map_range_seq<U, F>(n: usize, f: F) -> Vec<U>
where
    F: Fn(usize) -> U,
{
    (0..n).map(f).collect()
}

/// Map `f` over a slice, in parallel when requested and compiled in.
pub fn map_slice<T, U, F>(items: &[T], parallel: bool, f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel {
        return items.par_iter().map(f).collect();
    }
    let _ = parallel;
    items.iter().map(f).collect()
}

/// True when the crate was built with rayon support.
pub fn parallel_compiled() -> bool {
    cfg!(feature = "parallel")
}

/// Size the global worker pool (no-op without the `parallel` feature, or if
/// the pool is already running). Worker count never changes results, only
/// wall time.
pub fn configure_threads(n: usize) -> bool {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .is_ok()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = n;
        false
    }
}
