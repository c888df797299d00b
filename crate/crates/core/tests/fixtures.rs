//! Bundled fixtures are generated, then frozen. Run with `UPDATE_FIXTURES=1`
//! to rewrite them after changing the generator.

mod support;

use std::fs;
use std::io::BufReader;

use consolidsim::traces::{self, parse_demand_series, parse_swf, write_demand_csv, write_swf};
use consolidsim::{run, SimConfig};
use support::{fixture, synthetic};

fn render() -> (String, String) {
    let mut swf =
        b"; synthetic heavy-utilization batch trace for a 20-node machine\n; UnixStartTime: 0\n"
            .to_vec();
    write_swf(&mut swf, &synthetic::heavy_jobs(synthetic::DEFAULT_SEED)).unwrap();
    let mut csv = Vec::new();
    write_demand_csv(&mut csv, &synthetic::spiky_demand()).unwrap();
    (
        String::from_utf8(swf).unwrap(),
        String::from_utf8(csv).unwrap(),
    )
}

#[test]
fn synthetic_fixtures_are_frozen() {
    let (swf, csv) = render();
    let swf_path = fixture("synthetic_heavy.swf");
    let csv_path = fixture("synthetic_spiky_demand.csv");
    if std::env::var_os("UPDATE_FIXTURES").is_some() {
        fs::write(&swf_path, &swf).unwrap();
        fs::write(&csv_path, &csv).unwrap();
    }
    assert_eq!(fs::read_to_string(&swf_path).unwrap(), swf);
    assert_eq!(fs::read_to_string(&csv_path).unwrap(), csv);
}

#[test]
fn spiky_demand_shape() {
    let file = fs::File::open(fixture("synthetic_spiky_demand.csv")).unwrap();
    let demand = parse_demand_series(BufReader::new(file)).unwrap().series;
    assert_eq!(demand.peak(), 9);
    assert_eq!(demand.mean(), 3.0);
}

#[test]
fn heavy_trace_loads_and_fits() {
    let file = fs::File::open(fixture("synthetic_heavy.swf")).unwrap();
    let trace = parse_swf(BufReader::new(file), traces::DEFAULT_PROCS_PER_NODE).unwrap();
    assert_eq!(trace.skipped, 0);
    assert!(trace.jobs.iter().all(|j| j.requested_nodes <= 8));
    assert_eq!(trace.jobs, synthetic::heavy_jobs(synthetic::DEFAULT_SEED));
}

#[test]
fn dynamic_22_against_static_29() {
    let jobs = synthetic::heavy_jobs(synthetic::DEFAULT_SEED);
    let demand = synthetic::spiky_demand();
    let st = run(&jobs, &demand, &SimConfig::static_split(20, 9)).unwrap();
    let dy = run(&jobs, &demand, &SimConfig::dynamic(22)).unwrap();
    eprintln!(
        "static: completed {} killed {} turnaround {:?}; dynamic: completed {} killed {} turnaround {:?}",
        st.completed_count, st.killed_count, st.mean_turnaround, dy.completed_count, dy.killed_count, dy.mean_turnaround
    );
    assert!(dy.completed_count >= st.completed_count);
    assert!(dy.mean_turnaround.unwrap() <= st.mean_turnaround.unwrap());
}
