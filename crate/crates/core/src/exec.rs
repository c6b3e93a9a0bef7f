//! Execution strategy for the data-parallel loops (coset scans, Monte Carlo trials).
//!
//! With the `parallel` feature (on by default) [`Exec::Parallel`] runs on the rayon
//! pool. Without it, both variants run sequentially. Results never depend on the
//! variant: every reduction is order-independent or collected in index order.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exec {
    Sequential,
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
    /// Maps `f` over `0..len`, returning results in index order.
    pub fn map_range<T, F>(self, len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Send + Sync,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => {
                use rayon::prelude::*;
                (0..len).into_par_iter().map(f).collect()
            }
            _ => (0..len).map(f).collect(),
        }
    }

    /// Reduces `f(i)` over `0..len` with an associative, commutative `pick`.
    pub fn reduce_range<T, F, P>(self, len: usize, f: F, pick: P) -> Option<T>
    where
        T: Send,
        F: Fn(usize) -> T + Send + Sync,
        P: Fn(T, T) -> T + Send + Sync,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => {
                use rayon::prelude::*;
                (0..len).into_par_iter().map(f).reduce_with(pick)
            }
            _ => (0..len).map(f).reduce(pick),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_strategies_agree() {
        for exec in [Exec::Sequential, Exec::Parallel] {
            let squares = exec.map_range(100, |i| i * i);
            assert_eq!(squares[7], 49);
            assert_eq!(squares.len(), 100);
            let max = exec.reduce_range(100, |i| (i * 37) % 101, |a, b| a.max(b));
            assert_eq!(max, Some(100));
        }
        assert_eq!(Exec::Sequential.reduce_range(0, |i| i, |a, _| a), None);
    }
}
