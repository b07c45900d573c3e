//! Grid evaluation strategy.
//!
//! Pipelines evaluate many independent grid points (detunings, (ḡ₀, σ)
//! cells, repumper detunings). They hand those to an [`Executor`], which must
//! return results in input order so reductions stay deterministic no matter
//! how the work was scheduled.

use alloc::vec::Vec;

pub trait Executor: Sync {
    fn map<T, R, F>(&self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send;
}

/// Runs every item on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map<T, R, F>(&self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        items.iter().map(f).collect()
    }
}
