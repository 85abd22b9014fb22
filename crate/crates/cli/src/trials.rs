//! Per-trial seed derivation and seed-ordered parallel evaluation.

use rayon::prelude::*;

use crate::error::{CliError, CliResult};

/// One step of the SplitMix64 output function; a bijective 64-bit mixer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of trial `index` in dimension `d` of a run started from `base`.
///
/// Depends only on `(base, d, index)`, so a trial's inputs do not change when
/// the dimension range or trial count of the surrounding run changes.
pub fn trial_seed(base: u64, d: usize, index: usize) -> u64 {
    mix(base ^ mix(((d as u64) << 40) ^ index as u64))
}

/// Independent stream for a second random object belonging to the same trial.
pub fn companion_seed(seed: u64) -> u64 {
    mix(seed ^ 0x6a09_e667_f3bc_c908)
}

/// Maps `f` over `items`, returning results in input order for any thread count.
pub fn ordered_map<T, R, F>(items: &[T], threads: usize, f: F) -> CliResult<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    if threads <= 1 {
        return Ok(items.iter().map(f).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {threads} worker threads: {e}")))?;
    Ok(pool.install(|| items.par_iter().map(f).collect()))
}
