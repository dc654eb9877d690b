/// Whether the crate was built with the `parallel` feature.
pub fn parallel_enabled() -> bool {
    cfg!(feature = "parallel")
}

/// Maps `f` over `items`, in parallel when requested and available.
/// The output order always matches the input order.
pub fn par_map<T, R, F>(items: &[T], parallel: bool, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if parallel && items.len() > 1 {
            use rayon::prelude::*;
            return items.par_iter().map(f).collect();
        }
    }
    let _ = parallel;
    items.iter().map(f).collect()
}
