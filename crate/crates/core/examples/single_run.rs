//! One shared-cluster run over the bundled tiny fixtures.
//!
//! cargo run --example single_run -- [nodes] [realloc-delay]

use std::env;
use std::fs::File;
use std::io::BufReader;

use consolidsim::metrics::JobState;
use consolidsim::traces::{parse_demand_series, parse_swf, DEFAULT_PROCS_PER_NODE};
use consolidsim::{run, SimConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = env::args().skip(1);
    let nodes: u32 = args.next().map_or(Ok(7), |s| s.parse())?;
    let delay: u64 = args.next().map_or(Ok(5), |s| s.parse())?;
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures");

    let jobs = parse_swf(
        BufReader::new(File::open(format!("{dir}/tiny.swf"))?),
        DEFAULT_PROCS_PER_NODE,
    )?
    .jobs;
    let demand = parse_demand_series(BufReader::new(File::open(format!(
        "{dir}/tiny_demand.csv"
    ))?))?
    .series;
    let report = run(
        &jobs,
        &demand,
        &SimConfig::dynamic(nodes).with_realloc_delay(delay),
    )?;

    println!(
        "{}: {} submitted, {} completed, {} killed, mean turnaround {:.1} s, web demand met {:.1}%",
        report.label,
        report.submitted_count,
        report.completed_count,
        report.killed_count,
        report.mean_turnaround.unwrap_or(f64::NAN),
        100.0 * report.ws_demand_satisfaction
    );
    for o in &report.job_outcomes {
        let fate = match o.state {
            JobState::Killed => "killed",
            _ => "done",
        };
        println!(
            "  job {:>2} size {} submit {:>3} start {:>4} end {:>4} {fate}",
            o.job_id,
            o.size,
            o.submit,
            o.start.map_or("-".into(), |s| s.to_string()),
            o.end.map_or("-".into(), |s| s.to_string()),
        );
    }
    println!("web nodes held: {:?}", report.ws_series);
    Ok(())
}
