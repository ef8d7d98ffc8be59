//! Data-parallel loop helpers.
//!
//! Every hot loop in the crate is a per-node map or a sum over nodes. Both go
//! through [`Execution`] so the same code runs sequentially or on the rayon
//! pool. Sums are taken over fixed-size chunks and the partials are combined
//! in index order, so both modes produce bit-identical results.
//!
//! Without the `parallel` feature, [`Execution::Parallel`] falls back to the
//! sequential path.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Chunk length for deterministic reductions.
pub const REDUCE_CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// Whether this mode actually uses worker threads in the current build.
    pub fn is_threaded(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }

    /// Collect `f(i)` for `i in 0..n`, in index order.
    pub fn map<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Execution::Parallel {
            return (0..n).into_par_iter().map(f).collect();
        }
        (0..n).map(f).collect()
    }

    /// Overwrite `out[i] = f(i)`.
    pub fn fill<F>(self, out: &mut [f64], f: F)
    where
        F: Fn(usize) -> f64 + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Execution::Parallel {
            out.par_iter_mut().enumerate().for_each(|(i, v)| *v = f(i));
            return;
        }
        for (i, v) in out.iter_mut().enumerate() {
            *v = f(i);
        }
    }

    /// Apply `f(chunk_index, chunk)` to consecutive chunks of `out`.
    pub fn for_each_chunk<F>(self, out: &mut [f64], chunk: usize, f: F)
    where
        F: Fn(usize, &mut [f64]) + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Execution::Parallel {
            out.par_chunks_mut(chunk)
                .enumerate()
                .for_each(|(i, c)| f(i, c));
            return;
        }
        for (i, c) in out.chunks_mut(chunk).enumerate() {
            f(i, c);
        }
    }

    /// Order-stable sum of `f(i)` for `i in 0..n`.
    pub fn sum<F>(self, n: usize, f: F) -> f64
    where
        F: Fn(usize) -> f64 + Sync + Send,
    {
        let chunks = n.div_ceil(REDUCE_CHUNK);
        let partial = |c: usize| {
            let end = ((c + 1) * REDUCE_CHUNK).min(n);
            (c * REDUCE_CHUNK..end).map(&f).sum::<f64>()
        };
        self.map(chunks, partial).into_iter().sum()
    }

    /// Order-stable sums of several quantities at once.
    pub fn sum_n<const K: usize, F>(self, n: usize, f: F) -> [f64; K]
    where
        F: Fn(usize) -> [f64; K] + Sync + Send,
    {
        let chunks = n.div_ceil(REDUCE_CHUNK);
        let partial = |c: usize| {
            let end = ((c + 1) * REDUCE_CHUNK).min(n);
            let mut acc = [0.0; K];
            for i in c * REDUCE_CHUNK..end {
                let v = f(i);
                for k in 0..K {
                    acc[k] += v[k];
                }
            }
            acc
        };
        let mut total = [0.0; K];
        for p in self.map(chunks, partial) {
            for k in 0..K {
                total[k] += p[k];
            }
        }
        total
    }
}
