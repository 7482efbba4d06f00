//! Block-partitioned replication engine.
//!
//! Replications are cut into fixed blocks of [`BLOCK_SIZE`]; block `i` always
//! draws from substream `i` of the seed. Blocks run on the rayon pool and are
//! reassembled in block order, so results do not depend on the worker count.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::sampling::{DistributionSpec, SampleStream, Seed};
use crate::summary::{extract_unchecked, FiveNumbers};

pub const BLOCK_SIZE: u64 = 4096;

/// Runs `reps` replications of `per_rep` and returns their outputs in order.
pub fn replicate<R, F>(reps: u64, seed: Seed, per_rep: F) -> Vec<R>
where
    R: Send,
    F: Fn(&mut SampleStream) -> R + Sync,
{
    let blocks = reps.div_ceil(BLOCK_SIZE);
    let chunks: Vec<Vec<R>> = (0..blocks)
        .into_par_iter()
        .map(|block| {
            let count = BLOCK_SIZE.min(reps - block * BLOCK_SIZE);
            let mut stream = SampleStream::substream(seed, block);
            (0..count).map(|_| per_rep(&mut stream)).collect()
        })
        .collect();
    chunks.into_iter().flatten().collect()
}

/// Draws `reps` samples of size `n` from `dist` and maps each sample's
/// five-number summary through `stat`.
pub fn replicate_summaries<R, F>(
    dist: &DistributionSpec,
    n: usize,
    reps: u64,
    seed: Seed,
    stat: F,
) -> Vec<R>
where
    R: Send,
    F: Fn(&FiveNumbers) -> R + Sync,
{
    let blocks = reps.div_ceil(BLOCK_SIZE);
    let chunks: Vec<Vec<R>> = (0..blocks)
        .into_par_iter()
        .map(|block| {
            let count = BLOCK_SIZE.min(reps - block * BLOCK_SIZE);
            let mut stream = SampleStream::substream(seed, block);
            let mut buf = vec![0.0; n];
            (0..count)
                .map(|_| {
                    stream.fill(dist, &mut buf);
                    stat(&extract_unchecked(&mut buf))
                })
                .collect()
        })
        .collect();
    chunks.into_iter().flatten().collect()
}

/// Runs `f` on a dedicated pool of `workers` threads.
pub fn with_workers<R: Send, F: FnOnce() -> R + Send>(workers: usize, f: F) -> Result<R> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot build worker pool: {e}")))?;
    Ok(pool.install(f))
}

/// Empirical upper-`tail` quantile with linear interpolation between order
/// statistics (Hyndman–Fan type 7). Reorders `values`.
pub fn upper_quantile(values: &mut [f64], tail: f64) -> f64 {
    assert!(!values.is_empty());
    let h = (values.len() - 1) as f64 * (1.0 - tail);
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    let (_, x_lo, rest) = values.select_nth_unstable_by(lo, f64::total_cmp);
    let x_lo = *x_lo;
    if frac == 0.0 || rest.is_empty() {
        return x_lo;
    }
    let x_hi = rest.iter().copied().fold(f64::INFINITY, f64::min);
    x_lo + frac * (x_hi - x_lo)
}
