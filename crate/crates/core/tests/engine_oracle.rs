mod support;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use consolidsim::metrics::RunReport;
use consolidsim::traces::{DemandSeries, JobRecord};
use consolidsim::{run, Mode, SimConfig};
use support::gen::{self, Instance};
use support::oracle::{self, agrees};

fn check(inst: &Instance) -> RunReport {
    let report = run(&inst.jobs, &inst.demand, &inst.cfg).expect("engine run");
    let expected = oracle::simulate(&inst.jobs, &inst.demand, &inst.cfg);
    if let Err(e) = agrees(&report, &expected) {
        panic!("{e}\ninstance: {inst:#?}");
    }
    report
}

#[test]
fn random_instances_match_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut kills = 0;
    let mut delayed_kills = 0;
    for _ in 0..300 {
        let inst = gen::instance(&mut rng);
        let report = check(&inst);
        kills += report.killed_count;
        if inst.cfg.realloc_delay > 0 {
            delayed_kills += report.killed_count;
        }
    }
    assert!(kills > 20, "only {kills} kills across the batch");
    assert!(delayed_kills > 0);
}

#[test]
fn hand_built_reclaim_matches_oracle() {
    // one big job, then a spike that needs most of the machine
    let jobs = vec![
        JobRecord::new(1, 0, 100, 32, 8).unwrap(),
        JobRecord::new(2, 0, 300, 8, 8).unwrap(),
        JobRecord::new(3, 10, 50, 8, 8).unwrap(),
    ];
    let demand = DemandSeries::new(vec![(0, 1), (20, 5), (60, 2)], 200).unwrap();
    for delay in [0, 5] {
        let inst = Instance {
            jobs: jobs.clone(),
            demand: demand.clone(),
            cfg: SimConfig::dynamic(7).with_realloc_delay(delay),
        };
        check(&inst);
    }
}

#[test]
fn static_runs_never_kill() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut seen = 0;
    while seen < 50 {
        let inst = gen::instance(&mut rng);
        if !matches!(inst.cfg.mode, Mode::Static { .. }) {
            continue;
        }
        seen += 1;
        let report = run(&inst.jobs, &inst.demand, &inst.cfg).unwrap();
        assert_eq!(report.killed_count, 0);
    }
}
