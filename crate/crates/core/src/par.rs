//! Chunked map/reduce over index ranges, parallel with the `parallel`
//! feature and sequential otherwise.

use std::ops::Range;

/// How grid scans are executed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Uses the rayon pool when the `parallel` feature is enabled; identical to
    /// `Sequential` otherwise.
    #[default]
    Parallel,
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Grid points handled per task.
pub const CHUNK: u64 = 1 << 14;

fn chunk_ranges(range: Range<u64>, chunk: u64) -> impl Iterator<Item = Range<u64>> + Clone {
    let Range { start, end } = range;
    let n = (end.saturating_sub(start)).div_ceil(chunk);
    (0..n).map(move |c| {
        let lo = start + c * chunk;
        lo..(lo + chunk).min(end)
    })
}

/// Maps every chunk of `range` and folds the results left to right with
/// `reduce`. `reduce` must be associative; chunk order is preserved, so it
/// need not be commutative.
pub fn map_reduce<T, M, R>(exec: Execution, range: Range<u64>, chunk: u64, identity: T, map: M, reduce: R) -> T
where
    T: Send + Sync + Clone,
    M: Fn(Range<u64>) -> T + Sync + Send,
    R: Fn(T, T) -> T + Sync + Send,
{
    let chunks = chunk_ranges(range, chunk.max(1));
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        let chunks: Vec<Range<u64>> = chunks.collect();
        return chunks
            .into_par_iter()
            .map(&map)
            .reduce(|| identity.clone(), &reduce);
    }
    let _ = exec;
    chunks.map(map).fold(identity, reduce)
}

/// Evaluates `f` at every index in `range`, in order.
pub fn collect<T, F>(exec: Execution, range: Range<u64>, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return range.into_par_iter().map(f).collect();
    }
    let _ = exec;
    range.map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunks_cover_range() {
        let v: Vec<_> = chunk_ranges(3..20, 5).collect();
        assert_eq!(v, vec![3..8, 8..13, 13..18, 18..20]);
        assert_eq!(chunk_ranges(5..5, 4).count(), 0);
    }

    #[test]
    fn order_preserving_reduce() {
        for exec in [Execution::Sequential, Execution::Parallel] {
            let v = map_reduce(
                exec,
                0..1000,
                7,
                Vec::new(),
                |r| r.collect::<Vec<u64>>(),
                |mut a, b| {
                    a.extend(b);
                    a
                },
            );
            assert_eq!(v, (0..1000).collect::<Vec<_>>());
            assert_eq!(collect(exec, 0..50, |i| i * i)[7], 49);
        }
    }
}
