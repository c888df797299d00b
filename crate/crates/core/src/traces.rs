//! Workload trace ingestion: SWF job logs, request-rate series and
//! web-tier demand series.
//!
//! All times are trace-relative whole seconds. Parsers take any [`BufRead`]
//! so they work equally on files, byte slices and stdin.

use std::collections::HashSet;
use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::{JobId, Seconds};

/// Processors per node on SDSC BLUE (1152 processors over 144 nodes).
pub const DEFAULT_PROCS_PER_NODE: u32 = 8;

/// Two weeks, the length of both experiment windows.
pub const TWO_WEEKS: Seconds = 14 * 24 * 3600;

/// Apr 25 2000 15:00:03 PDT as a Unix timestamp: the start of the SDSC BLUE
/// window used in the consolidation experiment.
pub const SDSC_BLUE_WINDOW_START_UNIX: i64 = 956_700_003;

/// Scaling factor applied to the World Cup '98 request trace.
pub const WC98_SCALE_FACTOR: f64 = 2.22;

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: duplicate job id {job_id}")]
    DuplicateJobId { line: usize, job_id: JobId },
    #[error("trace is empty after filtering")]
    EmptyTrace,
    #[error("SWF header has no UnixStartTime; cannot place an absolute window")]
    MissingUnixStartTime,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid series: {0}")]
    InvalidSeries(String),
}

fn parse_err(line: usize, message: impl Into<String>) -> TraceError {
    TraceError::Parse {
        line,
        message: message.into(),
    }
}

/// One HPC batch job.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct JobRecord {
    pub job_id: JobId,
    pub submit_time: Seconds,
    pub runtime: Seconds,
    pub requested_procs: u32,
    pub requested_nodes: u32,
}

impl JobRecord {
    pub fn new(
        job_id: JobId,
        submit_time: Seconds,
        runtime: Seconds,
        requested_procs: u32,
        procs_per_node: u32,
    ) -> Result<Self, TraceError> {
        if runtime == 0 {
            return Err(TraceError::InvalidArgument(format!(
                "job {job_id}: runtime must be positive"
            )));
        }
        if requested_procs == 0 {
            return Err(TraceError::InvalidArgument(format!(
                "job {job_id}: processor count must be positive"
            )));
        }
        if procs_per_node == 0 {
            return Err(TraceError::InvalidArgument(
                "procs_per_node must be at least 1".into(),
            ));
        }
        Ok(Self {
            job_id,
            submit_time,
            runtime,
            requested_procs,
            requested_nodes: requested_procs.div_ceil(procs_per_node),
        })
    }
}

/// Jobs parsed from an SWF file, plus what the parser learnt on the way.
#[derive(Debug, Clone, PartialEq)]
pub struct SwfTrace {
    pub jobs: Vec<JobRecord>,
    /// Lines dropped for non-positive run time, processor count or submit time.
    pub skipped: usize,
    /// `; UnixStartTime:` header value, when present.
    pub unix_start_time: Option<i64>,
    /// Amount subtracted from every submit time so the earliest job is at 0.
    pub rebase_offset: Seconds,
}

fn parse_number(field: &str, line: usize, name: &str) -> Result<i64, TraceError> {
    if let Ok(v) = field.parse::<i64>() {
        return Ok(v);
    }
    match field.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v.round() as i64),
        _ => Err(parse_err(
            line,
            format!("non-numeric {name} field {field:?}"),
        )),
    }
}

/// Parses Standard Workload Format text.
///
/// Uses field 1 (job id), 2 (submit time), 4 (run time) and 5 (allocated
/// processors). Records with a non-positive run time or processor count, or
/// an unknown (negative) submit time, are skipped and counted. Submit times
/// are re-based so the earliest retained job arrives at 0.
pub fn parse_swf<R: BufRead>(input: R, procs_per_node: u32) -> Result<SwfTrace, TraceError> {
    if procs_per_node == 0 {
        return Err(TraceError::InvalidArgument(
            "procs_per_node must be at least 1".into(),
        ));
    }
    let mut raw = Vec::new();
    let mut seen = HashSet::new();
    let mut skipped = 0;
    let mut unix_start_time = None;

    for (idx, line) in input.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix(';') {
            if let Some((key, value)) = comment.split_once(':') {
                if key.trim() == "UnixStartTime" {
                    unix_start_time = value.trim().parse::<i64>().ok();
                }
            }
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() < 18 {
            return Err(parse_err(
                line_no,
                format!("expected at least 18 fields, found {}", fields.len()),
            ));
        }
        let job_id = parse_number(fields[0], line_no, "job id")?;
        let submit = parse_number(fields[1], line_no, "submit time")?;
        let runtime = parse_number(fields[3], line_no, "run time")?;
        let procs = parse_number(fields[4], line_no, "processor count")?;
        if runtime <= 0 || procs <= 0 || submit < 0 {
            skipped += 1;
            continue;
        }
        let job_id = JobId::try_from(job_id)
            .map_err(|_| parse_err(line_no, format!("negative job id {job_id}")))?;
        if !seen.insert(job_id) {
            return Err(TraceError::DuplicateJobId {
                line: line_no,
                job_id,
            });
        }
        let procs = u32::try_from(procs)
            .map_err(|_| parse_err(line_no, format!("processor count {procs} out of range")))?;
        raw.push(JobRecord::new(
            job_id,
            submit as Seconds,
            runtime as Seconds,
            procs,
            procs_per_node,
        )?);
    }

    let rebase_offset = raw
        .iter()
        .map(|j| j.submit_time)
        .min()
        .ok_or(TraceError::EmptyTrace)?;
    for job in &mut raw {
        job.submit_time -= rebase_offset;
    }
    Ok(SwfTrace {
        jobs: raw,
        skipped,
        unix_start_time,
        rebase_offset,
    })
}

/// Writes jobs back out as 18-field SWF lines. Fields the simulator does not
/// use are written as `-1`; status is written as 1 (completed).
pub fn write_swf<W: Write>(mut out: W, jobs: &[JobRecord]) -> io::Result<()> {
    writeln!(out, "; Version: 2.2")?;
    for j in jobs {
        writeln!(
            out,
            "{} {} -1 {} {} -1 -1 {} {} -1 1 -1 -1 -1 -1 -1 -1 -1",
            j.job_id, j.submit_time, j.runtime, j.requested_procs, j.requested_procs, j.runtime
        )?;
    }
    Ok(())
}

/// Keeps jobs with `start <= submit_time < start + length`, re-based to the
/// window start. Relative order is preserved.
pub fn window_jobs(jobs: &[JobRecord], start: Seconds, length: Seconds) -> Vec<JobRecord> {
    let end = start.saturating_add(length);
    jobs.iter()
        .filter(|j| j.submit_time >= start && j.submit_time < end)
        .map(|j| JobRecord {
            submit_time: j.submit_time - start,
            ..*j
        })
        .collect()
}

/// Windows a parsed SWF trace at an absolute Unix instant, using the
/// `UnixStartTime` header to convert to trace time. Submit times in the
/// result are relative to `unix_instant`.
pub fn window_at_instant(
    trace: &SwfTrace,
    unix_instant: i64,
    length: Seconds,
) -> Result<Vec<JobRecord>, TraceError> {
    let unix_start = trace
        .unix_start_time
        .ok_or(TraceError::MissingUnixStartTime)?;
    let start = unix_instant - unix_start;
    let end = start + length as i64;
    Ok(trace
        .jobs
        .iter()
        .filter_map(|j| {
            let abs = (j.submit_time + trace.rebase_offset) as i64;
            (abs >= start && abs < end).then(|| JobRecord {
                submit_time: (abs - start) as Seconds,
                ..*j
            })
        })
        .collect())
}

/// Splits off jobs that could never run on `max_nodes` nodes.
/// Returns the feasible jobs and the number rejected.
pub fn reject_oversized(jobs: &[JobRecord], max_nodes: u32) -> (Vec<JobRecord>, usize) {
    let (keep, reject): (Vec<_>, Vec<_>) =
        jobs.iter().partition(|j| j.requested_nodes <= max_nodes);
    if !reject.is_empty() {
        log::warn!(
            "rejected {} job(s) larger than {max_nodes} nodes",
            reject.len()
        );
    }
    (keep, reject.len())
}

/// Web request rate over time, piecewise constant between samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RequestSeries {
    samples: Vec<(Seconds, f64)>,
    duration: Seconds,
}

impl RequestSeries {
    pub fn new(samples: Vec<(Seconds, f64)>, duration: Seconds) -> Result<Self, TraceError> {
        let Some(&(first, _)) = samples.first() else {
            return Err(TraceError::InvalidSeries("request series is empty".into()));
        };
        if first != 0 {
            return Err(TraceError::InvalidSeries(format!(
                "first timestamp must be 0, got {first}"
            )));
        }
        if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(TraceError::InvalidSeries(
                "timestamps must be strictly increasing".into(),
            ));
        }
        if let Some((t, r)) = samples.iter().find(|(_, r)| !r.is_finite() || *r < 0.0) {
            return Err(TraceError::InvalidSeries(format!(
                "rate {r} at t={t} is not a finite non-negative number"
            )));
        }
        let last = samples[samples.len() - 1].0;
        if duration <= last {
            return Err(TraceError::InvalidSeries(format!(
                "duration {duration} must exceed the last timestamp {last}"
            )));
        }
        Ok(Self { samples, duration })
    }

    pub fn samples(&self) -> &[(Seconds, f64)] {
        &self.samples
    }

    pub fn duration(&self) -> Seconds {
        self.duration
    }

    /// Rate in effect at `t` (the last sample at or before `t`).
    pub fn rate_at(&self, t: Seconds) -> f64 {
        let idx = self.samples.partition_point(|&(ts, _)| ts <= t);
        self.samples[idx.saturating_sub(1)].1
    }

    pub fn peak_rate(&self) -> f64 {
        self.samples.iter().map(|&(_, r)| r).fold(0.0, f64::max)
    }
}

/// Multiplies every rate by `factor`.
pub fn scale_requests(series: &RequestSeries, factor: f64) -> Result<RequestSeries, TraceError> {
    if !(factor.is_finite() && factor > 0.0) {
        return Err(TraceError::InvalidArgument(format!(
            "scale factor must be positive, got {factor}"
        )));
    }
    Ok(RequestSeries {
        samples: series
            .samples
            .iter()
            .map(|&(t, r)| (t, r * factor))
            .collect(),
        duration: series.duration,
    })
}

/// Web-tier node demand over time, run-length encoded.
///
/// Demand before the first sample is taken to be the first sample's value.
/// The series ends at `duration`, after which the web tier is retired.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DemandSeries {
    samples: Vec<(Seconds, u32)>,
    duration: Seconds,
}

impl DemandSeries {
    /// Builds a series, merging consecutive samples with equal demand.
    pub fn new(samples: Vec<(Seconds, u32)>, duration: Seconds) -> Result<Self, TraceError> {
        if samples.is_empty() {
            return Err(TraceError::InvalidSeries("demand series is empty".into()));
        }
        if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(TraceError::InvalidSeries(
                "timestamps must be strictly increasing".into(),
            ));
        }
        if let Some((t, _)) = samples.iter().find(|(_, d)| *d == 0) {
            return Err(TraceError::InvalidSeries(format!(
                "demand at t={t} is below one instance"
            )));
        }
        let last = samples[samples.len() - 1].0;
        if duration <= last {
            return Err(TraceError::InvalidSeries(format!(
                "duration {duration} must exceed the last timestamp {last}"
            )));
        }
        let mut merged: Vec<(Seconds, u32)> = Vec::with_capacity(samples.len());
        for (t, d) in samples {
            if merged.last().is_some_and(|&(_, prev)| prev == d) {
                continue;
            }
            merged.push((t, d));
        }
        Ok(Self {
            samples: merged,
            duration,
        })
    }

    pub fn samples(&self) -> &[(Seconds, u32)] {
        &self.samples
    }

    pub fn duration(&self) -> Seconds {
        self.duration
    }

    pub fn peak(&self) -> u32 {
        self.samples.iter().map(|&(_, d)| d).max().unwrap_or(0)
    }

    /// Number of demand changes after the initial sample.
    pub fn change_count(&self) -> usize {
        self.samples.len() - 1
    }

    pub fn demand_at(&self, t: Seconds) -> u32 {
        let idx = self.samples.partition_point(|&(ts, _)| ts <= t);
        self.samples[idx.saturating_sub(1)].1
    }

    /// Demand integrated over `[0, duration)`, in node-seconds.
    pub fn integral(&self) -> u64 {
        let mut total = 0u64;
        for (i, &(t, d)) in self.samples.iter().enumerate() {
            let from = if i == 0 { 0 } else { t };
            let to = self
                .samples
                .get(i + 1)
                .map_or(self.duration, |&(next, _)| next);
            total += u64::from(d) * (to - from);
        }
        total
    }

    /// Time-weighted mean demand over `[0, duration)`.
    pub fn mean(&self) -> f64 {
        self.integral() as f64 / self.duration as f64
    }
}

/// A parsed demand CSV together with the number of values raised to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedDemand {
    pub series: DemandSeries,
    pub clamped: usize,
}

/// Rows of a two-column numeric CSV with an optional header, `#` comments and
/// an optional `# duration: N` directive.
struct CsvRows {
    rows: Vec<(usize, Seconds, String)>,
    duration: Option<Seconds>,
}

fn read_csv_rows<R: BufRead>(input: R) -> Result<CsvRows, TraceError> {
    let mut rows = Vec::new();
    let mut duration = None;
    for (idx, line) in input.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            if let Some((key, value)) = comment.split_once(':') {
                if key.trim() == "duration" {
                    duration = Some(value.trim().parse::<Seconds>().map_err(|_| {
                        parse_err(
                            line_no,
                            format!("bad duration directive {:?}", value.trim()),
                        )
                    })?);
                }
            }
            continue;
        }
        let Some((ts, value)) = trimmed.split_once(',') else {
            return Err(parse_err(line_no, "expected two comma-separated fields"));
        };
        let (ts, value) = (ts.trim(), value.trim());
        if rows.is_empty() && ts.parse::<f64>().is_err() {
            // header line
            continue;
        }
        let ts = ts
            .parse::<Seconds>()
            .map_err(|_| parse_err(line_no, format!("bad timestamp {ts:?}")))?;
        if let Some(&(_, prev, _)) = rows.last() {
            if ts <= prev {
                return Err(parse_err(
                    line_no,
                    format!("timestamp {ts} does not increase (previous {prev})"),
                ));
            }
        }
        rows.push((line_no, ts, value.to_string()));
    }
    Ok(CsvRows { rows, duration })
}

/// Duration implied by a list of timestamps: the last timestamp plus the
/// last sampling interval (1 s for a single sample).
fn implied_duration(timestamps: &[Seconds]) -> Seconds {
    match timestamps {
        [] => 0,
        [only] => only + 1,
        [.., a, b] => b + (b - a),
    }
}

/// Parses a `timestamp_seconds,requests_per_second` CSV. Timestamps are
/// re-based so the first sample is at 0.
pub fn parse_request_csv<R: BufRead>(input: R) -> Result<RequestSeries, TraceError> {
    let CsvRows { rows, duration } = read_csv_rows(input)?;
    if rows.is_empty() {
        return Err(TraceError::EmptyTrace);
    }
    let base = rows[0].1;
    let mut samples = Vec::with_capacity(rows.len());
    for (line, ts, value) in rows {
        let rate = value
            .parse::<f64>()
            .ok()
            .filter(|r| r.is_finite() && *r >= 0.0)
            .ok_or_else(|| parse_err(line, format!("bad request rate {value:?}")))?;
        samples.push((ts - base, rate));
    }
    let ts: Vec<_> = samples.iter().map(|&(t, _)| t).collect();
    let duration = duration
        .map(|d| d.saturating_sub(base))
        .unwrap_or_else(|| implied_duration(&ts));
    RequestSeries::new(samples, duration)
}

/// Parses a `timestamp_seconds,demand_nodes` CSV into a run-length encoded
/// series. Demands below 1 are raised to 1 and counted.
pub fn parse_demand_series<R: BufRead>(input: R) -> Result<ParsedDemand, TraceError> {
    let CsvRows { rows, duration } = read_csv_rows(input)?;
    if rows.is_empty() {
        return Err(TraceError::EmptyTrace);
    }
    let mut clamped = 0;
    let mut samples = Vec::with_capacity(rows.len());
    for (line, ts, value) in rows {
        let demand = value
            .parse::<i64>()
            .map_err(|_| parse_err(line, format!("demand {value:?} is not an integer")))?;
        let demand = if demand < 1 {
            clamped += 1;
            1
        } else {
            u32::try_from(demand)
                .map_err(|_| parse_err(line, format!("demand {demand} out of range")))?
        };
        samples.push((ts, demand));
    }
    if clamped > 0 {
        log::warn!("raised {clamped} demand value(s) below one instance to 1");
    }
    let ts: Vec<_> = samples.iter().map(|&(t, _)| t).collect();
    let duration = duration.unwrap_or_else(|| implied_duration(&ts));
    Ok(ParsedDemand {
        series: DemandSeries::new(samples, duration)?,
        clamped,
    })
}

/// Writes a demand series as `timestamp,demand` lines preceded by a
/// `# duration:` directive, so that parsing it back is lossless.
pub fn write_demand_csv<W: Write>(mut out: W, series: &DemandSeries) -> io::Result<()> {
    writeln!(out, "# duration: {}", series.duration)?;
    for &(t, d) in &series.samples {
        writeln!(out, "{t},{d}")?;
    }
    Ok(())
}
