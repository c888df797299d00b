//! Load an SWF job log, cut a window at an absolute instant and drop jobs too
//! wide for the batch pool.
//!
//! cargo run --example swf_window -- [trace.swf] [unix-start] [length-secs] [max-nodes]

use std::env;
use std::fs::File;
use std::io::BufReader;

use consolidsim::traces::{self, DEFAULT_PROCS_PER_NODE};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = env::args().skip(1).collect();
    let path = args
        .first()
        .cloned()
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/tiny.swf").into());
    let start: i64 = args.get(1).map_or(Ok(956_701_100), |s| s.parse())?;
    let len: u64 = args.get(2).map_or(Ok(400), |s| s.parse())?;
    let max_nodes: u32 = args.get(3).map_or(Ok(4), |s| s.parse())?;

    let trace = traces::parse_swf(BufReader::new(File::open(&path)?), DEFAULT_PROCS_PER_NODE)?;
    println!(
        "{path}: {} jobs kept, {} skipped, epoch {:?}",
        trace.jobs.len(),
        trace.skipped,
        trace.unix_start_time
    );

    let window = traces::window_at_instant(&trace, start, len)?;
    let (fits, rejected) = traces::reject_oversized(&window, max_nodes);
    println!(
        "window [{start}, +{len}s): {} jobs, {rejected} wider than {max_nodes} nodes",
        window.len()
    );
    for j in &fits {
        println!(
            "  job {:>3} submit {:>5}s runtime {:>4}s {} procs -> {} nodes",
            j.job_id, j.submit_time, j.runtime, j.requested_procs, j.requested_nodes
        );
    }
    Ok(())
}
