//! Trace-driven discrete-event simulation of a shared cluster that hosts both
//! HPC batch jobs and an elastic web-service tier.
//!
//! The web tier (WS) has absolute priority: whenever its node demand rises, the
//! provisioner first hands out idle nodes and then forces the batch tier (ST) to
//! give nodes back, killing running jobs smallest-first if it has to. Idle nodes
//! always flow to the batch tier, where a First-Fit scheduler starts queued jobs.
//!
//! The crate is organised bottom-up:
//!
//! - [`traces`]: SWF job logs, request-rate and demand CSV series.
//! - [`autoscaler`]: threshold autoscaler turning request rates into instance demand.
//! - [`cluster`]: node-pool partition with conservation checking.
//! - [`policies`]: the cooperative provisioning / release / kill rules as pure functions.
//! - [`scheduler`]: First-Fit job queue.
//! - [`engine`]: the event loop tying everything together.
//! - [`metrics`]: run reports, cross-configuration comparison, CSV/JSON output.
//! - [`cli`]: the `consolidsim` command-line front end.
//!
//! A minimal run:
//!
//! ```
//! use consolidsim::engine::{run, SimConfig};
//! use consolidsim::traces::{DemandSeries, JobRecord};
//!
//! let jobs = vec![JobRecord::new(1, 0, 100, 8, 8).unwrap()];
//! let demand = DemandSeries::new(vec![(0, 1)], 200).unwrap();
//! let report = run(&jobs, &demand, &SimConfig::dynamic(2)).unwrap();
//! assert_eq!(report.completed_count, 1);
//! assert_eq!(report.mean_turnaround, Some(100.0));
//! ```

pub mod autoscaler;
pub mod cli;
pub mod cluster;
pub mod engine;
pub mod metrics;
pub mod policies;
pub mod scheduler;
pub mod traces;

/// Virtual time and durations, in whole seconds.
pub type Seconds = u64;

/// Batch job identifier, as carried in the SWF trace.
pub type JobId = u64;

/// Index of a node in the shared pool, `0..total_nodes`.
pub type NodeId = u32;

pub use engine::{run, Mode, SimConfig};
pub use metrics::{compare, RunReport};
pub use traces::{DemandSeries, JobRecord, RequestSeries};
