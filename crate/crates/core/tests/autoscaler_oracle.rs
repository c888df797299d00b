mod support;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use consolidsim::autoscaler::{derive_demand, AutoscalerConfig};
use consolidsim::traces::{scale_requests, RequestSeries};
use support::{gen, scaler};

#[test]
fn random_series_match_scalar_loop() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut changes = 0;
    for _ in 0..200 {
        let requests = gen::request_series(&mut rng);
        let cfg = gen::scaler_config(&mut rng);
        let got = derive_demand(&requests, &cfg).unwrap();
        let want = scaler::derive(&requests, &cfg);
        assert_eq!(got.samples(), want.as_slice(), "{requests:?} {cfg:?}");
        changes += got.change_count();
        assert!(got.samples().iter().all(|&(_, n)| n >= cfg.min_instances));
    }
    assert!(changes > 200, "series barely move: {changes} changes");
}

#[test]
fn ninety_percent_constant_load() {
    // the value frozen in the unit tests
    let r = RequestSeries::new(vec![(0, 90.0)], 600).unwrap();
    assert_eq!(
        scaler::derive(&r, &AutoscalerConfig::new(100.0)),
        vec![(0, 1), (20, 2)]
    );
}

#[test]
fn deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let r = gen::request_series(&mut rng);
    let cfg = gen::scaler_config(&mut rng);
    assert_eq!(
        derive_demand(&r, &cfg).unwrap(),
        derive_demand(&r, &cfg).unwrap()
    );
}

/// Higher load never ends with fewer instances, once both runs have had time
/// to settle on the last rate.
#[test]
fn monotone_load_dominance() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..150 {
        let b = gen::request_series(&mut rng);
        let mut cfg = gen::scaler_config(&mut rng);
        cfg.tick = 1;
        let lifted: Vec<_> = b
            .samples()
            .iter()
            .map(|&(t, r)| (t, r * rng.gen_range(1.0..3.0)))
            .collect();
        // long tail at each series' final rate
        let tail = 40 * (b.peak_rate() / cfg.capacity_per_instance) as u64 * cfg.window + 2_000;
        let a = RequestSeries::new(lifted, b.duration() + tail).unwrap();
        let b = RequestSeries::new(b.samples().to_vec(), b.duration() + tail).unwrap();
        let na = scaler::derive(&a, &cfg).last().unwrap().1;
        let nb = scaler::derive(&b, &cfg).last().unwrap().1;
        assert!(na >= nb, "{na} < {nb} for {a:?} vs {b:?}");
    }
}

#[test]
fn scale_factor_raises_peak() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..50 {
        let r = gen::request_series(&mut rng);
        let cfg = AutoscalerConfig::new(100.0);
        let base = derive_demand(&r, &cfg).unwrap().peak();
        let scaled = derive_demand(&scale_requests(&r, 2.22).unwrap(), &cfg)
            .unwrap()
            .peak();
        assert!(base <= scaled);
    }
}
