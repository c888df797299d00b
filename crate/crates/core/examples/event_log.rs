//! Print the event trace of a small run with a forced reclaim.

use consolidsim::engine::run_with_log;
use consolidsim::traces::{DemandSeries, JobRecord};
use consolidsim::SimConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let jobs = vec![
        JobRecord::new(1, 0, 100, 2, 1)?,
        JobRecord::new(2, 0, 300, 1, 1)?,
        JobRecord::new(3, 10, 50, 1, 1)?,
    ];
    // at t=20 the web tier wants four more nodes: two free ones, then two jobs die
    let demand = DemandSeries::new(vec![(0, 1), (20, 5), (60, 2)], 200)?;
    let (report, log) = run_with_log(&jobs, &demand, &SimConfig::dynamic(7))?;
    println!("time\tkind\tpayload");
    for line in &log {
        println!("{line}");
    }
    eprintln!(
        "{} killed, {} completed",
        report.killed_count, report.completed_count
    );
    Ok(())
}
