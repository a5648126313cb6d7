//! Data-parallel execution of independent Monte Carlo runs.
//!
//! Every run draws from its own RNG stream keyed by its index, so results do
//! not depend on scheduling; outputs are always returned in index order.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    Sequential,
    /// Uses the rayon pool when the `parallel` feature is enabled and falls
    /// back to sequential execution otherwise.
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
    /// `(0..n).map(f)`, possibly across threads.
    pub fn map<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            Execution::Sequential => (0..n).map(f).collect(),
            Execution::Parallel => parallel_map(n, f),
        }
    }

    /// Like [`Execution::map`] for fallible runs; the first error in index
    /// order is returned.
    pub fn try_map<T, E, F>(self, n: usize, f: F) -> Result<Vec<T>, E>
    where
        T: Send,
        E: Send,
        F: Fn(usize) -> Result<T, E> + Sync + Send,
    {
        self.map(n, f).into_iter().collect()
    }
}

#[cfg(feature = "parallel")]
fn parallel_map<T: Send, F: Fn(usize) -> T + Sync + Send>(n: usize, f: F) -> Vec<T> {
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn parallel_map<T: Send, F: Fn(usize) -> T + Sync + Send>(n: usize, f: F) -> Vec<T> {
    (0..n).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_modes_agree_and_keep_order() {
        let f = |i: usize| i * i;
        assert_eq!(
            Execution::Sequential.map(100, f),
            Execution::Parallel.map(100, f)
        );
        assert_eq!(Execution::Parallel.map(5, f), vec![0, 1, 4, 9, 16]);
    }

    #[test]
    fn try_map_reports_first_error() {
        let r: Result<Vec<usize>, usize> =
            Execution::Parallel.try_map(10, |i| if i % 4 == 3 { Err(i) } else { Ok(i) });
        assert_eq!(r, Err(3));
    }
}
