//! Data-parallel primitives with a sequential fallback.
//!
//! With the `parallel` feature these dispatch to rayon; without it they are
//! ordinary loops. Floating-point reductions always combine fixed-size
//! blocks in index order, so sums do not depend on the thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Block length for order-stable reductions.
pub const REDUCE_BLOCK: usize = 4096;

#[cfg(feature = "parallel")]
const MIN_LEN: usize = 1024;

/// Calls `f(chunk_index, chunk)` for consecutive `chunk`-sized pieces of `data`.
pub fn for_each_chunk_mut<T, F>(data: &mut [T], chunk: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    data.par_chunks_mut(chunk)
        .enumerate()
        .for_each(|(i, c)| f(i, c));
    #[cfg(not(feature = "parallel"))]
    data.chunks_mut(chunk)
        .enumerate()
        .for_each(|(i, c)| f(i, c));
}

/// Like [`for_each_chunk_mut`] with per-worker scratch state built by `init`.
pub fn for_each_chunk_mut_init<T, S, I, F>(data: &mut [T], chunk: usize, init: I, f: F)
where
    T: Send,
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, usize, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    data.par_chunks_mut(chunk)
        .enumerate()
        .for_each_init(&init, |s, (i, c)| f(s, i, c));
    #[cfg(not(feature = "parallel"))]
    {
        let mut s = init();
        data.chunks_mut(chunk)
            .enumerate()
            .for_each(|(i, c)| f(&mut s, i, c));
    }
}

/// Overwrites `out[i]` with `f(i)`.
pub fn fill_indexed<T, F>(out: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    out.par_iter_mut()
        .with_min_len(MIN_LEN)
        .enumerate()
        .for_each(|(i, o)| *o = f(i));
    #[cfg(not(feature = "parallel"))]
    out.iter_mut().enumerate().for_each(|(i, o)| *o = f(i));
}

/// Collects `f(0), f(1), .., f(n - 1)`.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n)
            .into_par_iter()
            .with_min_len(MIN_LEN)
            .map(f)
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Maps every element of `src`, preserving order.
pub fn map_slice<T, U, F>(src: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        src.par_iter().with_min_len(MIN_LEN).map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        src.iter().map(f).collect()
    }
}

/// Maps coarse work items (one per task, no batching), preserving order.
pub fn map_tasks<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(usize, &T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().enumerate().map(|(i, t)| f(i, t)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().enumerate().map(|(i, t)| f(i, t)).collect()
    }
}

/// Order-stable sum of `f(i)` over `0..n`.
pub fn sum_indexed<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let blocks = n.div_ceil(REDUCE_BLOCK);
    let block_sum = |b: usize| {
        let start = b * REDUCE_BLOCK;
        let end = (start + REDUCE_BLOCK).min(n);
        (start..end).map(&f).sum::<f64>()
    };
    #[cfg(feature = "parallel")]
    let partial: Vec<f64> = (0..blocks).into_par_iter().map(block_sum).collect();
    #[cfg(not(feature = "parallel"))]
    let partial: Vec<f64> = (0..blocks).map(block_sum).collect();
    partial.into_iter().sum()
}

/// Minimum and maximum of `f(i)` over `0..n`; `None` when `n == 0`.
pub fn min_max_indexed<F>(n: usize, f: F) -> Option<(f64, f64)>
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    if n == 0 {
        return None;
    }
    let fold = |(lo, hi): (f64, f64), x: f64| (lo.min(x), hi.max(x));
    let id = (f64::INFINITY, f64::NEG_INFINITY);
    #[cfg(feature = "parallel")]
    let r = (0..n)
        .into_par_iter()
        .with_min_len(MIN_LEN)
        .map(f)
        .fold(|| id, fold)
        .reduce(|| id, |a, b| (a.0.min(b.0), a.1.max(b.1)));
    #[cfg(not(feature = "parallel"))]
    let r = (0..n).map(f).fold(id, fold);
    Some(r)
}

/// Number of indices in `0..n` where `pred(i)` holds.
pub fn count_indexed<F>(n: usize, pred: F) -> usize
where
    F: Fn(usize) -> bool + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n)
            .into_par_iter()
            .with_min_len(MIN_LEN)
            .filter(|&i| pred(i))
            .count()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).filter(|&i| pred(i)).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sum_is_block_ordered() {
        let n = 3 * REDUCE_BLOCK + 17;
        let f = |i: usize| ((i as f64) * 0.1).sin();
        let mut expected = 0.0;
        for b in 0..n.div_ceil(REDUCE_BLOCK) {
            let s: f64 = (b * REDUCE_BLOCK..((b + 1) * REDUCE_BLOCK).min(n))
                .map(f)
                .sum();
            expected += s;
        }
        assert_eq!(sum_indexed(n, f).to_bits(), expected.to_bits());
    }

    #[test]
    fn empty_reductions() {
        assert_eq!(sum_indexed(0, |_| 1.0), 0.0);
        assert!(min_max_indexed(0, |_| 1.0).is_none());
        assert_eq!(count_indexed(0, |_| true), 0);
    }

    #[test]
    fn chunk_indices_are_ordered() {
        let mut v = vec![0usize; 10];
        for_each_chunk_mut(&mut v, 3, |ci, c| c.iter_mut().for_each(|x| *x = ci));
        assert_eq!(v, [0, 0, 0, 1, 1, 1, 2, 2, 2, 3]);
    }
}
