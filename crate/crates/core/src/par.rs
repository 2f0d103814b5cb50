//! Order-preserving data-parallel map with a sequential fallback.

use std::sync::atomic::{AtomicU8, Ordering};

/// Execution strategy for the bulk loops of the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    /// Runs on the rayon pool when the `parallel` feature is enabled.
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

impl Exec {
    /// Map `f` over `items`, keeping the input order in the output.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel if items.len() > 1 => {
                use rayon::prelude::*;
                items.par_iter().map(f).collect()
            }
            _ => items.iter().map(f).collect(),
        }
    }
}

static CURRENT: AtomicU8 = AtomicU8::new(0);

impl Exec {
    /// Strategy used by [`map`]: the compile-time default unless overridden.
    pub fn current() -> Exec {
        match CURRENT.load(Ordering::Relaxed) {
            1 => Exec::Sequential,
            2 => Exec::Parallel,
            _ => Exec::default(),
        }
    }

    /// Override the strategy used by [`map`] for the whole process.
    pub fn set_current(e: Exec) {
        CURRENT.store(if e == Exec::Sequential { 1 } else { 2 }, Ordering::Relaxed);
    }
}

/// [`Exec::map`] with the current strategy.
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    Exec::current().map(items, f)
}
