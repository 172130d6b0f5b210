//! Data-parallel map with a sequential fallback.
//!
//! With the `parallel` feature (on by default) [`Execution::Parallel`] runs
//! on the rayon global pool; without it every request runs sequentially.
//! Results are always returned in input order, so output never depends on
//! scheduling.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

impl Execution {
    /// The mode that will actually run given the compiled features.
    pub fn effective(self) -> Execution {
        if cfg!(feature = "parallel") {
            self
        } else {
            Execution::Sequential
        }
    }
}

pub(crate) fn map_range<R, F>(exec: Execution, lo: i64, hi: i64, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(i64) -> R + Sync + Send,
{
    match exec.effective() {
        #[cfg(feature = "parallel")]
        Execution::Parallel => (lo..=hi).into_par_iter().map(f).collect(),
        _ => (lo..=hi).map(f).collect(),
    }
}

pub(crate) fn map_slice<T, R, F>(exec: Execution, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match exec.effective() {
        #[cfg(feature = "parallel")]
        Execution::Parallel => items.par_iter().map(f).collect(),
        _ => items.iter().map(f).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved_in_both_modes() {
        let seq = map_range(Execution::Sequential, -3, 1000, |k| k * k);
        let par = map_range(Execution::Parallel, -3, 1000, |k| k * k);
        assert_eq!(seq, par);
        assert_eq!(seq[0], 9);
        let items: Vec<u32> = (0..500).collect();
        assert_eq!(
            map_slice(Execution::Sequential, &items, |x| x + 1),
            map_slice(Execution::Parallel, &items, |x| x + 1)
        );
    }
}
