//! Fixed-block work scheduling.
//!
//! Every heavy loop in this crate is split into blocks whose boundaries
//! depend only on the problem size, never on thread count. Blocks are
//! evaluated independently (on the rayon pool when the `parallel` feature is
//! enabled, inline otherwise) and combined in block order, so parallel and
//! sequential runs produce bit-identical results.

/// Number of outer-loop rows grouped into one block.
pub const BLOCK: usize = 32;

/// Evaluates `f(0..blocks)` and returns the results in index order,
/// using the rayon pool when available.
#[cfg(feature = "parallel")]
pub fn map_blocks<T, F>(blocks: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..blocks).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_blocks<T, F>(blocks: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    map_blocks_seq(blocks, f)
}

/// Single-threaded evaluation with the same block order. Public so callers
/// (and the bench suite) can compare both paths.
pub fn map_blocks_seq<T, F>(blocks: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..blocks).map(f).collect()
}

/// Block count covering `len` items in chunks of `BLOCK`.
pub fn block_count(len: usize) -> usize {
    len.div_ceil(BLOCK)
}

/// Item range of block `b`.
pub fn block_range(b: usize, len: usize) -> std::ops::Range<usize> {
    let lo = b * BLOCK;
    lo..(lo + BLOCK).min(len)
}
