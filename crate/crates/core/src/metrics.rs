//! Run reports, cross-configuration comparison and report output.
//!
//! Batch-side benefit is the number of completed jobs and the reciprocal of
//! the mean turnaround time (completion minus submission, completed jobs
//! only). Cost is the configured cluster size. The web tier is scored by the
//! fraction of demanded node-seconds it actually held.
//!
//! Jobs still running when the demand series ends are run to completion, so
//! two counts are kept: every completion, and completions inside the
//! observation window `[0, horizon)`.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::engine::{Mode, SimConfig};
use crate::traces::{DemandSeries, JobRecord};
use crate::{JobId, Seconds};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("{0} job(s) are neither completed nor killed")]
    Unfinished(usize),
    #[error("need at least two reports to compare, got {0}")]
    NotEnoughReports(usize),
    #[error("reports come from different traces ({0} vs {1})")]
    IncomparableRuns(String, String),
    #[error("no static-configuration report to use as baseline")]
    NoBaseline,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum JobState {
    Queued,
    Running,
    Completed,
    Killed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct JobOutcome {
    pub job_id: JobId,
    pub size: u32,
    pub runtime: Seconds,
    pub submit: Seconds,
    pub start: Option<Seconds>,
    pub end: Option<Seconds>,
    pub state: JobState,
}

impl JobOutcome {
    pub fn turnaround(&self) -> Option<Seconds> {
        match (self.state, self.end) {
            (JobState::Completed, Some(end)) => Some(end - self.submit),
            _ => None,
        }
    }
}

/// Node usage at a point in time. `idle` counts every node that is neither
/// running a batch job nor held by the web tier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct UtilSample {
    pub time: Seconds,
    pub st: u32,
    pub ws: u32,
    pub idle: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowStats {
    pub horizon: Seconds,
    pub completed: usize,
    pub mean_turnaround: Option<f64>,
    pub turnaround_reciprocal: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub label: String,
    pub mode: String,
    pub config_size: u32,
    pub st_nodes: Option<u32>,
    pub ws_nodes: Option<u32>,
    pub realloc_delay: Seconds,
    pub submitted_count: usize,
    pub completed_count: usize,
    pub killed_count: usize,
    pub mean_turnaround: Option<f64>,
    pub turnaround_reciprocal: Option<f64>,
    pub in_window: WindowStats,
    pub ws_demand_satisfaction: f64,
    /// Demanded but unheld web-tier node-seconds.
    pub unmet_demand_integral: u64,
    pub peak_demand: u32,
    /// Peak demand exceeds what the web tier could ever hold in this configuration.
    pub demand_exceeds_capacity: bool,
    pub makespan: Seconds,
    pub trace_hash: String,
    pub ws_series: Vec<(Seconds, u32)>,
    pub utilization_series: Vec<UtilSample>,
    pub job_outcomes: Vec<JobOutcome>,
}

fn mean_of(turnarounds: impl Iterator<Item = Seconds>) -> (usize, Option<f64>) {
    let (n, sum) = turnarounds.fold((0usize, 0u128), |(n, s), t| (n + 1, s + u128::from(t)));
    (n, (n > 0).then(|| sum as f64 / n as f64))
}

/// Held-vs-demanded node-seconds over `[0, duration)`: (met, demanded).
fn demand_coverage(ws_series: &[(Seconds, u32)], demand: &DemandSeries) -> (u64, u64) {
    let horizon = demand.duration();
    let mut cuts: Vec<Seconds> = demand
        .samples()
        .iter()
        .map(|&(t, _)| t)
        .chain(ws_series.iter().map(|&(t, _)| t))
        .filter(|&t| t < horizon)
        .chain([0])
        .collect();
    cuts.sort_unstable();
    cuts.dedup();
    let held_at = |t: Seconds| {
        let idx = ws_series.partition_point(|&(ts, _)| ts <= t);
        if idx == 0 {
            0
        } else {
            ws_series[idx - 1].1
        }
    };
    let mut met = 0u64;
    let mut wanted = 0u64;
    for (i, &from) in cuts.iter().enumerate() {
        let to = cuts.get(i + 1).copied().unwrap_or(horizon);
        let d = u64::from(demand.demand_at(from));
        let h = u64::from(held_at(from));
        met += d.min(h) * (to - from);
        wanted += d * (to - from);
    }
    (met, wanted)
}

/// Stable fingerprint of the inputs a run was driven by.
pub fn trace_identity(jobs: &[JobRecord], demand: &DemandSeries) -> String {
    let mut h = Sha256::new();
    for j in jobs {
        h.update(
            format!(
                "{} {} {} {}\n",
                j.job_id, j.submit_time, j.runtime, j.requested_nodes
            )
            .as_bytes(),
        );
    }
    h.update(b"--\n");
    for &(t, d) in demand.samples() {
        h.update(format!("{t} {d}\n").as_bytes());
    }
    h.update(format!("{}\n", demand.duration()).as_bytes());
    h.finalize()[..8]
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Assembles the report of a finished run.
pub fn finalize(
    mut job_outcomes: Vec<JobOutcome>,
    ws_series: Vec<(Seconds, u32)>,
    utilization_series: Vec<UtilSample>,
    demand: &DemandSeries,
    cfg: &SimConfig,
    trace_hash: String,
    makespan: Seconds,
) -> Result<RunReport, MetricsError> {
    let unfinished = job_outcomes
        .iter()
        .filter(|o| !matches!(o.state, JobState::Completed | JobState::Killed))
        .count();
    if unfinished > 0 {
        return Err(MetricsError::Unfinished(unfinished));
    }
    job_outcomes.sort_by_key(|o| o.job_id);

    let horizon = demand.duration();
    let (completed_count, mean_turnaround) =
        mean_of(job_outcomes.iter().filter_map(JobOutcome::turnaround));
    let (in_window_completed, in_window_mean) = mean_of(
        job_outcomes
            .iter()
            .filter(|o| o.end.is_some_and(|e| e <= horizon))
            .filter_map(JobOutcome::turnaround),
    );
    let killed_count = job_outcomes
        .iter()
        .filter(|o| o.state == JobState::Killed)
        .count();

    let (met, wanted) = demand_coverage(&ws_series, demand);
    let (st_nodes, ws_nodes) = match cfg.mode {
        Mode::Static { st_nodes, ws_nodes } => (Some(st_nodes), Some(ws_nodes)),
        Mode::Dynamic => (None, None),
    };

    Ok(RunReport {
        label: cfg.label(),
        mode: match cfg.mode {
            Mode::Static { .. } => "static".into(),
            Mode::Dynamic => "dynamic".into(),
        },
        config_size: cfg.total_nodes,
        st_nodes,
        ws_nodes,
        realloc_delay: cfg.realloc_delay,
        submitted_count: job_outcomes.len(),
        completed_count,
        killed_count,
        mean_turnaround,
        turnaround_reciprocal: mean_turnaround.map(|m| 1.0 / m),
        in_window: WindowStats {
            horizon,
            completed: in_window_completed,
            mean_turnaround: in_window_mean,
            turnaround_reciprocal: in_window_mean.map(|m| 1.0 / m),
        },
        ws_demand_satisfaction: if wanted == 0 {
            1.0
        } else {
            met as f64 / wanted as f64
        },
        unmet_demand_integral: wanted - met,
        peak_demand: demand.peak(),
        demand_exceeds_capacity: demand.peak() > cfg.ws_capacity(),
        makespan,
        trace_hash,
        ws_series,
        utilization_series,
        job_outcomes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub label: String,
    pub mode: String,
    pub config_size: u32,
    pub cost_ratio: f64,
    pub submitted: usize,
    pub completed: usize,
    pub killed: usize,
    pub mean_turnaround: Option<f64>,
    pub turnaround_reciprocal: Option<f64>,
    pub completed_in_window: usize,
    pub mean_turnaround_in_window: Option<f64>,
    pub ws_demand_satisfaction: f64,
    pub unmet_demand_integral: u64,
    pub delta_completed: i64,
    pub delta_killed: i64,
    pub delta_mean_turnaround: Option<f64>,
    pub delta_completed_in_window: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub baseline: String,
    pub baseline_size: u32,
    pub rows: Vec<ComparisonRow>,
}

impl Comparison {
    pub fn row(&self, label: &str) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.label == label)
    }
}

/// Tabulates runs against the static baseline (the largest static run).
/// Rows are ordered static first, then by descending size.
pub fn compare(reports: &[RunReport]) -> Result<Comparison, MetricsError> {
    if reports.len() < 2 {
        return Err(MetricsError::NotEnoughReports(reports.len()));
    }
    let hash = &reports[0].trace_hash;
    if let Some(other) = reports.iter().find(|r| &r.trace_hash != hash) {
        return Err(MetricsError::IncomparableRuns(
            hash.clone(),
            other.trace_hash.clone(),
        ));
    }
    let mut sorted: Vec<&RunReport> = reports.iter().collect();
    sorted.sort_by(|a, b| {
        (
            a.mode != "static",
            std::cmp::Reverse(a.config_size),
            &a.label,
            a.realloc_delay,
        )
            .cmp(&(
                b.mode != "static",
                std::cmp::Reverse(b.config_size),
                &b.label,
                b.realloc_delay,
            ))
    });
    let base = *sorted
        .first()
        .filter(|r| r.mode == "static")
        .ok_or(MetricsError::NoBaseline)?;

    let rows = sorted
        .iter()
        .map(|r| ComparisonRow {
            label: r.label.clone(),
            mode: r.mode.clone(),
            config_size: r.config_size,
            cost_ratio: f64::from(r.config_size) / f64::from(base.config_size),
            submitted: r.submitted_count,
            completed: r.completed_count,
            killed: r.killed_count,
            mean_turnaround: r.mean_turnaround,
            turnaround_reciprocal: r.turnaround_reciprocal,
            completed_in_window: r.in_window.completed,
            mean_turnaround_in_window: r.in_window.mean_turnaround,
            ws_demand_satisfaction: r.ws_demand_satisfaction,
            unmet_demand_integral: r.unmet_demand_integral,
            delta_completed: r.completed_count as i64 - base.completed_count as i64,
            delta_killed: r.killed_count as i64 - base.killed_count as i64,
            delta_mean_turnaround: r
                .mean_turnaround
                .zip(base.mean_turnaround)
                .map(|(a, b)| a - b),
            delta_completed_in_window: r.in_window.completed as i64
                - base.in_window.completed as i64,
        })
        .collect();
    Ok(Comparison {
        baseline: base.label.clone(),
        baseline_size: base.config_size,
        rows,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

const RUN_HEADER: &str = "label,mode,config_size,submitted,completed,killed,mean_turnaround,turnaround_reciprocal,\
completed_in_window,mean_turnaround_in_window,ws_demand_satisfaction,unmet_demand_integral,peak_demand,makespan,trace_hash";

/// One summary row per report.
pub fn write_runs_csv<W: Write>(mut out: W, reports: &[&RunReport]) -> io::Result<()> {
    writeln!(out, "{RUN_HEADER}")?;
    for r in reports {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{:.6},{},{},{},{}",
            r.label,
            r.mode,
            r.config_size,
            r.submitted_count,
            r.completed_count,
            r.killed_count,
            opt(r.mean_turnaround),
            opt(r.turnaround_reciprocal),
            r.in_window.completed,
            opt(r.in_window.mean_turnaround),
            r.ws_demand_satisfaction,
            r.unmet_demand_integral,
            r.peak_demand,
            r.makespan,
            r.trace_hash
        )?;
    }
    Ok(())
}

pub fn write_comparison_csv<W: Write>(mut out: W, cmp: &Comparison) -> io::Result<()> {
    writeln!(
        out,
        "label,mode,config_size,cost_ratio,submitted,completed,killed,mean_turnaround,turnaround_reciprocal,\
completed_in_window,mean_turnaround_in_window,ws_demand_satisfaction,unmet_demand_integral,\
delta_completed,delta_killed,delta_mean_turnaround,delta_completed_in_window"
    )?;
    for r in &cmp.rows {
        writeln!(
            out,
            "{},{},{},{:.6},{},{},{},{},{},{},{},{:.6},{},{},{},{},{}",
            r.label,
            r.mode,
            r.config_size,
            r.cost_ratio,
            r.submitted,
            r.completed,
            r.killed,
            opt(r.mean_turnaround),
            opt(r.turnaround_reciprocal),
            r.completed_in_window,
            opt(r.mean_turnaround_in_window),
            r.ws_demand_satisfaction,
            r.unmet_demand_integral,
            r.delta_completed,
            r.delta_killed,
            opt(r.delta_mean_turnaround),
            r.delta_completed_in_window
        )?;
    }
    Ok(())
}

/// Long-form `time,st,ws,idle` series for plotting.
pub fn write_utilization_csv<W: Write>(mut out: W, report: &RunReport) -> io::Result<()> {
    writeln!(out, "time,st,ws,idle")?;
    for u in &report.utilization_series {
        writeln!(out, "{},{},{},{}", u.time, u.st, u.ws, u.idle)?;
    }
    Ok(())
}

pub fn write_report_json<W: Write>(out: W, report: &RunReport) -> io::Result<()> {
    serde_json::to_writer_pretty(out, report).map_err(io::Error::other)
}
