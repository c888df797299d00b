//! Random small instances for oracle comparisons.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use consolidsim::autoscaler::AutoscalerConfig;
use consolidsim::traces::{DemandSeries, JobRecord, RequestSeries};
use consolidsim::SimConfig;

#[derive(Debug, Clone)]
pub struct Instance {
    pub jobs: Vec<JobRecord>,
    pub demand: DemandSeries,
    pub cfg: SimConfig,
}

/// At most 10 nodes, 20 jobs and 10 demand changes.
pub fn instance(rng: &mut ChaCha8Rng) -> Instance {
    let total = rng.gen_range(2..=10u32);
    let mut cfg = if rng.gen_bool(0.25) {
        let ws = rng.gen_range(1..total);
        SimConfig::static_split(total - ws, ws)
    } else {
        SimConfig::dynamic(total)
    };
    cfg = cfg
        .with_realloc_delay(*[0, 1, 3, 5, 12].get(rng.gen_range(0..5)).unwrap())
        .with_strict_fifo(rng.gen_bool(0.2));
    let max_size = cfg.st_capacity();

    let n_jobs = rng.gen_range(0..=20);
    let jobs = (0..n_jobs)
        .map(|i| {
            let size = rng.gen_range(1..=max_size);
            JobRecord::new(
                i + 1,
                rng.gen_range(0..150),
                rng.gen_range(1..=80),
                size * 8,
                8,
            )
            .unwrap()
        })
        .collect();

    let changes = rng.gen_range(0..=10);
    let mut samples = vec![(0u64, rng.gen_range(1..=total))];
    let mut t = 0;
    for _ in 0..changes {
        t += rng.gen_range(1..40);
        samples.push((t, rng.gen_range(1..=total + 1)));
    }
    let duration = t + rng.gen_range(1..100);
    Instance {
        jobs,
        demand: DemandSeries::new(samples, duration).expect("generated demand is valid"),
        cfg,
    }
}

pub fn request_series(rng: &mut ChaCha8Rng) -> RequestSeries {
    let pieces = rng.gen_range(1..=12);
    let mut samples = Vec::with_capacity(pieces);
    let mut t = 0;
    for _ in 0..pieces {
        let rate = if rng.gen_bool(0.1) {
            0.0
        } else {
            rng.gen_range(0.0..2_500.0)
        };
        samples.push((t, rate));
        t += rng.gen_range(1..400);
    }
    RequestSeries::new(samples, t).expect("generated request series is valid")
}

pub fn scaler_config(rng: &mut ChaCha8Rng) -> AutoscalerConfig {
    let mut cfg = AutoscalerConfig::new(rng.gen_range(40.0..400.0));
    cfg.upscale_threshold = rng.gen_range(0.5..0.95);
    cfg.window = rng.gen_range(1..=40);
    cfg.tick = rng.gen_range(1..=4);
    cfg.min_instances = rng.gen_range(1..=3);
    cfg
}
