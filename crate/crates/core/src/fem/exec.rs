//! Element loops: rayon-parallel or sequential, merged in element order so
//! results do not depend on the thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// How element contributions are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Data-parallel over elements; equivalent to `Sequential` when the
    /// `parallel` feature is disabled.
    #[default]
    Parallel,
}

const CHUNK: usize = 64;

/// Computes `f(e)` for every element and hands the results to `sink` in
/// increasing element order.
pub fn map_elements<T: Send>(n: usize, exec: Execution, f: impl Fn(usize) -> T + Sync, mut sink: impl FnMut(usize, T)) {
    let mut lo = 0;
    while lo < n {
        let hi = (lo + CHUNK).min(n);
        let out: Vec<T> = match exec {
            #[cfg(feature = "parallel")]
            Execution::Parallel => (lo..hi).into_par_iter().map(&f).collect(),
            _ => (lo..hi).map(&f).collect(),
        };
        for (k, t) in out.into_iter().enumerate() {
            sink(lo + k, t);
        }
        lo = hi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        for exec in [Execution::Sequential, Execution::Parallel] {
            let mut seen = Vec::new();
            map_elements(200, exec, |e| e * e, |e, v| {
                assert_eq!(v, e * e);
                seen.push(e);
            });
            assert_eq!(seen, (0..200).collect::<Vec<_>>());
        }
    }
}
