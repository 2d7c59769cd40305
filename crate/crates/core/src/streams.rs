//! Counter-based random streams for reproducible parallel Monte-Carlo.
//!
//! Work is cut into fixed-size blocks. Block `b` of grid point `g` draws from
//! the ChaCha8 keystream keyed by the master seed with stream id
//! `(g << 40) | b`, so the numbers a block sees depend only on
//! `(seed, g, b)` and never on which worker runs it. Partial results are
//! reduced in block order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Trials per block.
pub const BLOCK_SIZE: u64 = 1 << 16;

const BLOCK_BITS: u32 = 40;

/// Generator for block `block` of grid point `point` under `seed`.
pub fn block_rng(seed: u64, point: u64, block: u64) -> ChaCha8Rng {
    debug_assert!(block < (1 << BLOCK_BITS));
    debug_assert!(point < (1 << (64 - BLOCK_BITS)));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((point << BLOCK_BITS) | block);
    rng
}

/// Splits `total` trials into `(block index, trials in block)` pairs.
pub fn blocks(total: u64) -> impl IndexedParallelIterator<Item = (u64, u64)> {
    let n_blocks = total.div_ceil(BLOCK_SIZE) as usize;
    (0..n_blocks).into_par_iter().map(move |b| {
        let b = b as u64;
        let start = b * BLOCK_SIZE;
        (b, BLOCK_SIZE.min(total - start))
    })
}

/// Runs `work(block, len)` over all blocks in parallel and folds the
/// partial results in block order.
pub fn map_blocks<R, W, F>(total: u64, work: W, init: R, fold: F) -> R
where
    R: Send,
    W: Fn(u64, u64) -> R + Sync + Send,
    F: FnMut(R, R) -> R,
{
    let partials: Vec<R> = blocks(total).map(|(b, len)| work(b, len)).collect();
    partials.into_iter().fold(init, fold)
}
