//! Reproducible random streams and the replicate-parallel driver.
//!
//! Every replicate `i` draws from its own ChaCha8 stream selected by
//! `set_stream(i)` on a generator keyed by the master seed. Work is
//! distributed with rayon, but results are collected in replicate order and
//! reduced sequentially, so outputs depend on `(master_seed, replicate)`
//! only and never on the number of workers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "DRP_WORKERS";

pub type Stream = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64) -> Self {
        Self { master_seed }
    }

    /// Independent stream for replicate `index`.
    pub fn stream(&self, index: u64) -> Stream {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(index);
        rng
    }

    /// A seed for an unrelated purpose (e.g. building a cached sample next to
    /// a replicate loop) that shares no stream with `self`.
    pub fn derive(&self, label: u64) -> SeedSpec {
        SeedSpec::new(splitmix64(self.master_seed ^ splitmix64(label)))
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Worker count from `DRP_WORKERS`, falling back to available parallelism.
pub fn default_workers() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
}

/// Runs `f(index, stream)` for every replicate in `0..replicates` on a pool of
/// `workers` threads and returns the results in replicate order.
pub fn run_replicates<T, F>(
    seed: SeedSpec,
    replicates: usize,
    workers: usize,
    f: F,
) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64, &mut Stream) -> Result<T> + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
    pool.install(|| {
        (0..replicates as u64)
            .into_par_iter()
            .map(|i| {
                let mut rng = seed.stream(i);
                f(i, &mut rng)
            })
            .collect::<Result<Vec<T>>>()
    })
}

/// Draws `count` values from `draw`, split into fixed-size batches with one
/// stream per batch. The batch layout depends only on `count`.
pub fn draw_batched<F>(seed: SeedSpec, count: usize, workers: usize, draw: F) -> Result<Vec<f64>>
where
    F: Fn(&mut Stream) -> f64 + Sync,
{
    const BATCH: usize = 8192;
    let batches = count.div_ceil(BATCH);
    let chunks = run_replicates(seed, batches, workers, |b, rng| {
        let start = b as usize * BATCH;
        let len = BATCH.min(count - start);
        Ok((0..len).map(|_| draw(rng)).collect::<Vec<f64>>())
    })?;
    Ok(chunks.into_iter().flatten().collect())
}
