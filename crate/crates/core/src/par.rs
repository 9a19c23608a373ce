//! Chain-level data parallelism.
//!
//! With the `parallel` feature (on by default) chains are mapped over a rayon
//! pool; without it, or under [`ExecPolicy::Sequential`], they run in index
//! order on the calling thread. Each chain touches only its own state and
//! random stream, so both policies produce bit-identical results.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// How per-chain work is dispatched.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExecPolicy {
    Sequential,
    #[default]
    Parallel,
}

impl ExecPolicy {
    /// The effective policy: `Parallel` degrades to `Sequential` when the
    /// crate is built without the `parallel` feature.
    pub fn effective(self) -> Self {
        if cfg!(feature = "parallel") {
            self
        } else {
            ExecPolicy::Sequential
        }
    }
}

/// Apply `f` to every `(item, aux)` pair.
pub fn for_each_zip<A, B, F>(policy: ExecPolicy, items: &mut [A], aux: &mut [B], f: F)
where
    A: Send,
    B: Send,
    F: Fn(&mut A, &mut B) + Sync + Send,
{
    assert_eq!(items.len(), aux.len(), "parallel slices must align");
    match policy.effective() {
        ExecPolicy::Sequential => items.iter_mut().zip(aux.iter_mut()).for_each(|(a, b)| f(a, b)),
        #[cfg(feature = "parallel")]
        ExecPolicy::Parallel => items
            .par_iter_mut()
            .zip(aux.par_iter_mut())
            .for_each(|(a, b)| f(a, b)),
        #[cfg(not(feature = "parallel"))]
        ExecPolicy::Parallel => unreachable!(),
    }
}

/// Map `f` over a slice, preserving order.
pub fn map<A, T, F>(policy: ExecPolicy, items: &[A], f: F) -> Vec<T>
where
    A: Sync,
    T: Send,
    F: Fn(&A) -> T + Sync + Send,
{
    match policy.effective() {
        ExecPolicy::Sequential => items.iter().map(f).collect(),
        #[cfg(feature = "parallel")]
        ExecPolicy::Parallel => items.par_iter().map(f).collect(),
        #[cfg(not(feature = "parallel"))]
        ExecPolicy::Parallel => unreachable!(),
    }
}

/// Map `f` over an index range, preserving order.
pub fn map_range<T, F>(policy: ExecPolicy, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match policy.effective() {
        ExecPolicy::Sequential => (0..n).map(f).collect(),
        #[cfg(feature = "parallel")]
        ExecPolicy::Parallel => (0..n).into_par_iter().map(f).collect(),
        #[cfg(not(feature = "parallel"))]
        ExecPolicy::Parallel => unreachable!(),
    }
}

/// Run `f` with a dedicated pool of `threads` workers. Without the
/// `parallel` feature this just calls `f`.
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    #[cfg(feature = "parallel")]
    {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build()
            .expect("failed to build rayon pool");
        pool.install(f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        f()
    }
}
