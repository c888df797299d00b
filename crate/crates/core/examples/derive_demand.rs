//! Turn a request-rate series into a web-tier instance demand series with the
//! threshold autoscaler, optionally calibrating capacity to a target peak.
//!
//! cargo run --example derive_demand -- [requests.csv] [scale-factor] [target-peak]

use std::env;
use std::fs::File;
use std::io::{self, BufReader};

use consolidsim::autoscaler::{calibrate_capacity, derive_demand, AutoscalerConfig};
use consolidsim::traces::{self, parse_request_csv, scale_requests};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = env::args().skip(1).collect();
    let path = args.first().cloned().unwrap_or_else(|| {
        concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/tiny_requests.csv").into()
    });
    let factor: f64 = args
        .get(1)
        .map_or(Ok(traces::WC98_SCALE_FACTOR), |s| s.parse())?;
    let target: u32 = args.get(2).map_or(Ok(6), |s| s.parse())?;

    let requests = scale_requests(
        &parse_request_csv(BufReader::new(File::open(&path)?))?,
        factor,
    )?;
    let mut cfg = AutoscalerConfig::new(1.0);
    cfg.capacity_per_instance = calibrate_capacity(&requests, &cfg, target)?;
    let demand = derive_demand(&requests, &cfg)?;

    eprintln!(
        "peak rate {:.1} req/s, capacity {:.3} req/s per instance",
        requests.peak_rate(),
        cfg.capacity_per_instance
    );
    eprintln!(
        "peak {} instances, {} changes, mean {:.2}",
        demand.peak(),
        demand.change_count(),
        demand.mean()
    );
    traces::write_demand_csv(io::stdout().lock(), &demand)?;
    Ok(())
}
