//! Dedicated pools against a smaller shared pool on the bundled synthetic
//! fixtures: 20 batch + 9 web nodes, then shared clusters of 26 down to 20.
//! Prints the comparison table as CSV.

use std::fs::File;
use std::io::{self, BufReader};

use consolidsim::engine::run_sweep;
use consolidsim::metrics::{compare, write_comparison_csv};
use consolidsim::traces::{parse_demand_series, parse_swf, DEFAULT_PROCS_PER_NODE};
use consolidsim::SimConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures");
    let jobs = parse_swf(
        BufReader::new(File::open(format!("{dir}/synthetic_heavy.swf"))?),
        DEFAULT_PROCS_PER_NODE,
    )?
    .jobs;
    let demand = parse_demand_series(BufReader::new(File::open(format!(
        "{dir}/synthetic_spiky_demand.csv"
    ))?))?
    .series;

    let mut configs = vec![SimConfig::static_split(20, 9)];
    configs.extend((20..=26).rev().map(SimConfig::dynamic));
    let reports = run_sweep(&jobs, &demand, &configs, false)
        .into_iter()
        .map(|r| r.map(|(report, _)| report))
        .collect::<Result<Vec<_>, _>>()?;
    let table = compare(&reports)?;
    write_comparison_csv(io::stdout().lock(), &table)?;
    Ok(())
}
