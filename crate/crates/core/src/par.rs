//! Indirection over rayon so the whole crate builds with or without it.
//!
//! With the `parallel` feature (the default), batch work fans out over a
//! rayon pool; without it the same entry points run sequentially.  The
//! runtime `parallel` flag on [`run_cases`] lets callers compare both code
//! paths from a single binary.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `items`, honoring a runtime switch.  Falls back to the
/// sequential path when the crate was built without `parallel`.
pub fn run_cases<T, R, F>(items: Vec<T>, parallel: bool, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if parallel {
            return items.into_par_iter().map(f).collect();
        }
    }
    let _ = parallel;
    items.into_iter().map(f).collect()
}
