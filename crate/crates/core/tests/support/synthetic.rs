//! Generator for the bundled desk-scale fixtures.
//!
//! Six 4000 s cycles. The web tier wants 1 node for 3000 s, then 9 for 1000 s
//! (peak 9, mean 3). Batch work arrives during the first half of each quiet
//! phase in bursts sized for a 20-node machine.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use consolidsim::traces::{DemandSeries, JobRecord};

pub const DEFAULT_SEED: u64 = 20_100_531;
pub const CYCLE: u64 = 4_000;
pub const QUIET: u64 = 3_000;
pub const CYCLES: u64 = 6;
pub const SUBMIT_SPAN: u64 = 1_500;
/// Batch node-seconds offered per cycle: 21 nodes busy across the submit span.
pub const WORK_PER_CYCLE: u64 = 21 * SUBMIT_SPAN;

pub fn seed() -> u64 {
    std::env::var("CONSOLIDSIM_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(DEFAULT_SEED)
}

pub fn heavy_jobs(seed: u64) -> Vec<JobRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut jobs = Vec::new();
    let mut id = 1;
    for c in 0..CYCLES {
        let base = c * CYCLE;
        let mut work = 0;
        let mut batch = Vec::new();
        while work < WORK_PER_CYCLE {
            let size: u32 = rng.gen_range(1..=8);
            let runtime: u64 = rng.gen_range(60..=600);
            work += u64::from(size) * runtime;
            // each burst opens at the cycle boundary
            let offset = if batch.is_empty() {
                0
            } else {
                rng.gen_range(0..SUBMIT_SPAN)
            };
            batch.push((base + offset, runtime, size));
        }
        batch.sort_unstable();
        for (submit, runtime, size) in batch {
            jobs.push(JobRecord::new(id, submit, runtime, size * 8, 8).unwrap());
            id += 1;
        }
    }
    jobs
}

pub fn spiky_demand() -> DemandSeries {
    let mut samples = Vec::new();
    for c in 0..CYCLES {
        samples.push((c * CYCLE, 1));
        samples.push((c * CYCLE + QUIET, 9));
    }
    DemandSeries::new(samples, CYCLES * CYCLE).expect("spiky demand is valid")
}
