//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) the indexed maps below run on the
//! rayon pool; without it they are plain iterator loops. Every helper
//! returns results in index order, so output never depends on scheduling.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// `f(0), f(1), ..., f(n - 1)` in index order, sequentially.
pub fn map_indexed_sequential<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// `f(0), f(1), ..., f(n - 1)` in index order on the rayon pool.
#[cfg(feature = "parallel")]
pub fn map_indexed_parallel<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

/// Indexed map using the build's default execution mode.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        map_indexed_parallel(n, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_indexed_sequential(n, f)
    }
}

/// Sum of integer-valued tallies over `0..n`. Integer addition is
/// associative, so the parallel and sequential paths agree exactly.
pub fn sum_tallies<const K: usize, F>(n: usize, f: F) -> [u64; K]
where
    F: Fn(usize) -> [u64; K] + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        sum_tallies_parallel(n, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        sum_tallies_sequential(n, f)
    }
}

pub fn sum_tallies_sequential<const K: usize, F>(n: usize, f: F) -> [u64; K]
where
    F: Fn(usize) -> [u64; K],
{
    (0..n).map(f).fold([0; K], add_tallies)
}

#[cfg(feature = "parallel")]
pub fn sum_tallies_parallel<const K: usize, F>(n: usize, f: F) -> [u64; K]
where
    F: Fn(usize) -> [u64; K] + Sync + Send,
{
    (0..n).into_par_iter().map(f).reduce(|| [0; K], add_tallies)
}

fn add_tallies<const K: usize>(mut acc: [u64; K], x: [u64; K]) -> [u64; K] {
    for (a, b) in acc.iter_mut().zip(x) {
        *a += b;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indexed_map_preserves_order() {
        let v = map_indexed(1000, |i| i * 2);
        assert_eq!(v, map_indexed_sequential(1000, |i| i * 2));
    }

    #[test]
    fn tallies_agree() {
        let f = |i: usize| [i as u64, i.is_multiple_of(3) as u64];
        assert_eq!(sum_tallies(5000, f), sum_tallies_sequential(5000, f));
    }
}
