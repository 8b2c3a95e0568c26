//! Execution strategy for independent trials.

use std::ops::Range;

/// `Parallel` uses the rayon pool when the `parallel` feature is enabled and
/// runs sequentially otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

/// Maps every index and combines the results. `reduce` must be associative
/// and commutative for the two strategies to agree.
pub fn map_reduce<T, M, R>(range: Range<u64>, exec: Execution, identity: T, map: M, reduce: R) -> T
where
    T: Send + Clone + Sync,
    M: Fn(u64) -> T + Sync + Send,
    R: Fn(T, T) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            range
                .into_par_iter()
                .map(map)
                .reduce(|| identity.clone(), reduce)
        }
        _ => range.map(map).fold(identity, reduce),
    }
}

/// Results in index order.
pub fn map_collect<T, M>(range: Range<u64>, exec: Execution, map: M) -> Vec<T>
where
    T: Send,
    M: Fn(u64) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            range.into_par_iter().map(map).collect()
        }
        _ => range.map(map).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strategies_agree() {
        let f = |i: u64| i * i;
        let a = map_reduce(0..10_000, Execution::Sequential, 0u64, f, |x, y| x + y);
        let b = map_reduce(0..10_000, Execution::Parallel, 0u64, f, |x, y| x + y);
        assert_eq!(a, b);
        assert_eq!(
            map_collect(0..100, Execution::Parallel, f),
            map_collect(0..100, Execution::Sequential, f)
        );
    }
}
