//! The `consolidsim` command line.
//!
//! Three subcommands:
//!
//! - `run`: load traces, run one or more configurations, write reports.
//! - `derive-demand`: turn a request-rate CSV into a demand CSV.
//! - `validate`: parse inputs and print diagnostics without simulating.
//!
//! `run` options may also come from a `--config` file of `key = value` lines
//! whose keys are the long flag names; flags given on the command line win.
//!
//! Exit codes: 0 on success, 1 when a run's peak web demand exceeds what the
//! configuration can ever hold, 2 for input or specification errors.

use std::collections::HashMap;
use std::fmt::Display;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use crate::autoscaler::{self, AutoscalerConfig};
use crate::engine::{self, SimConfig, DEFAULT_REALLOC_DELAY};
use crate::metrics::{self, RunReport};
use crate::traces::{self, DemandSeries, JobRecord, DEFAULT_PROCS_PER_NODE, TWO_WEEKS};
use crate::Seconds;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INFEASIBLE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

/// Static 208-node baseline followed by the dynamic sweep.
pub const DEFAULT_SIZES: &str = "208:static,200,190,180,170,160,150";

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn input(message: impl Display) -> Self {
        Self {
            code: EXIT_INPUT,
            message: message.to_string(),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "consolidsim",
    version,
    about = "Consolidated HPC + web-service cluster simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one or more cluster configurations and write reports.
    Run(RunArgs),
    /// Derive a web-tier demand series from a request-rate CSV.
    DeriveDemand(DeriveArgs),
    /// Parse inputs and print diagnostics.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Args, Default)]
pub struct AutoscalerArgs {
    /// Requests/second one instance serves at 100% CPU.
    #[arg(long)]
    pub capacity: Option<f64>,
    /// Calibrate capacity so that the derived demand peaks at this many instances.
    #[arg(long)]
    pub target_peak: Option<u32>,
    /// Multiply request rates by this factor before deriving demand.
    #[arg(long)]
    pub scale_factor: Option<f64>,
    /// Autoscaler averaging window in seconds.
    #[arg(long)]
    pub window_secs: Option<Seconds>,
    /// Autoscaler sampling interval in seconds.
    #[arg(long)]
    pub tick: Option<Seconds>,
    /// Upscale utilization threshold.
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub min_instances: Option<u32>,
}

#[derive(Debug, Clone, Args, Default)]
pub struct RunArgs {
    /// Key-value experiment file; command-line flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// HPC job trace in Standard Workload Format.
    #[arg(long)]
    pub hpc_trace: Option<PathBuf>,
    /// Precomputed web-tier demand CSV (`timestamp,demand`).
    #[arg(long, conflicts_with = "requests_csv")]
    pub demand_csv: Option<PathBuf>,
    /// Request-rate CSV (`timestamp,requests_per_second`) to derive demand from.
    #[arg(long)]
    pub requests_csv: Option<PathBuf>,
    #[command(flatten)]
    pub autoscaler: AutoscalerArgs,
    /// Window start: seconds into the trace, or `unix:<epoch>` using the SWF header.
    #[arg(long)]
    pub window_start: Option<String>,
    #[arg(long)]
    pub window_len: Option<Seconds>,
    /// Comma list of cluster sizes; `N:static` marks a dedicated-pool baseline.
    #[arg(long)]
    pub sizes: Option<String>,
    /// Batch and web pool sizes for static runs, `ST,WS`.
    #[arg(long)]
    pub static_split: Option<String>,
    #[arg(long)]
    pub realloc_delay: Option<Seconds>,
    #[arg(long)]
    pub procs_per_node: Option<u32>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write one tab-separated event log per run.
    #[arg(long)]
    pub event_log: bool,
    /// Block the queue at the first job that does not fit.
    #[arg(long)]
    pub strict_fifo: bool,
}

#[derive(Debug, Clone, Args)]
pub struct DeriveArgs {
    #[arg(long)]
    pub requests_csv: PathBuf,
    #[command(flatten)]
    pub autoscaler: AutoscalerArgs,
    /// Where to write the demand CSV.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub hpc_trace: Option<PathBuf>,
    #[arg(long)]
    pub demand_csv: Option<PathBuf>,
    #[arg(long)]
    pub requests_csv: Option<PathBuf>,
    #[arg(long)]
    pub window_start: Option<String>,
    #[arg(long)]
    pub window_len: Option<Seconds>,
    #[arg(long)]
    pub procs_per_node: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WindowStart {
    Offset(Seconds),
    Unix(i64),
}

impl FromStr for WindowStart {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Some(epoch) = s.strip_prefix("unix:") {
            epoch
                .parse()
                .map(WindowStart::Unix)
                .map_err(|_| format!("bad unix timestamp {epoch:?}"))
        } else {
            s.parse()
                .map(WindowStart::Offset)
                .map_err(|_| format!("bad window start {s:?}"))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SizeSpec {
    pub total: u32,
    pub is_static: bool,
}

pub fn parse_sizes(s: &str) -> Result<Vec<SizeSpec>, String> {
    let sizes = s
        .split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|part| {
            let (num, is_static) = match part.split_once(':') {
                Some((n, "static")) => (n, true),
                Some((_, tag)) => return Err(format!("unknown size tag {tag:?}")),
                None => (part, false),
            };
            let total = num
                .trim()
                .parse::<u32>()
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(|| format!("bad cluster size {num:?}"))?;
            Ok(SizeSpec { total, is_static })
        })
        .collect::<Result<Vec<_>, _>>()?;
    if sizes.is_empty() {
        return Err("at least one cluster size is required".into());
    }
    Ok(sizes)
}

fn parse_pair(s: &str) -> Result<(u32, u32), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected ST,WS, got {s:?}"))?;
    let parse = |v: &str| {
        v.trim()
            .parse::<u32>()
            .map_err(|_| format!("bad node count {v:?}"))
    };
    Ok((parse(a)?, parse(b)?))
}

#[derive(Debug, Clone, PartialEq)]
pub enum DemandSource {
    Csv(PathBuf),
    Requests {
        path: PathBuf,
        scale_factor: f64,
        autoscaler: AutoscalerConfig,
        target_peak: Option<u32>,
    },
}

/// A fully resolved experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub hpc_trace: PathBuf,
    pub demand_source: DemandSource,
    pub window_start: WindowStart,
    pub window_len: Seconds,
    pub sizes: Vec<SizeSpec>,
    pub static_split: Option<(u32, u32)>,
    pub realloc_delay: Seconds,
    pub procs_per_node: u32,
    pub out: PathBuf,
    pub event_log: bool,
    pub strict_fifo: bool,
}

/// Parses a `key = value` experiment file. `#` starts a comment line.
pub fn parse_config_file(text: &str) -> Result<HashMap<String, String>, String> {
    let mut map = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected key = value", i + 1))?;
        map.insert(
            k.trim().trim_start_matches("--").to_string(),
            v.trim().to_string(),
        );
    }
    Ok(map)
}

struct Layered<'a> {
    file: &'a HashMap<String, String>,
}

impl Layered<'_> {
    fn get<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        self.file
            .get(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| CliError::input(format!("config key {key}: {e}")))
            })
            .transpose()
    }

    fn flag(&self, flag: bool, key: &str) -> Result<bool, CliError> {
        Ok(flag || self.get::<bool>(None, key)?.unwrap_or(false))
    }
}

fn autoscaler_config(
    a: &AutoscalerArgs,
    layer: &Layered<'_>,
) -> Result<(AutoscalerConfig, Option<u32>, f64), CliError> {
    let mut cfg = AutoscalerConfig::new(layer.get(a.capacity, "capacity")?.unwrap_or(1.0));
    if let Some(w) = layer.get(a.window_secs, "window-secs")? {
        cfg.window = w;
    }
    if let Some(t) = layer.get(a.tick, "tick")? {
        cfg.tick = t;
    }
    if let Some(t) = layer.get(a.threshold, "threshold")? {
        cfg.upscale_threshold = t;
    }
    if let Some(m) = layer.get(a.min_instances, "min-instances")? {
        cfg.min_instances = m;
    }
    let target_peak = layer.get(a.target_peak, "target-peak")?;
    let has_capacity = layer.get(a.capacity, "capacity")?.is_some();
    if has_capacity == target_peak.is_some() {
        return Err(CliError::input(
            "deriving demand needs exactly one of --capacity or --target-peak",
        ));
    }
    cfg.validate().map_err(CliError::input)?;
    let scale = layer.get(a.scale_factor, "scale-factor")?.unwrap_or(1.0);
    Ok((cfg, target_peak, scale))
}

impl ExperimentSpec {
    pub fn resolve(args: &RunArgs) -> Result<Self, CliError> {
        let file = match &args.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
                let mut map = parse_config_file(&text).map_err(CliError::input)?;
                // relative paths in the file are relative to the file
                let base = path.parent().unwrap_or(Path::new(""));
                for key in ["hpc-trace", "demand-csv", "requests-csv", "out"] {
                    if let Some(v) = map.get_mut(key) {
                        if Path::new(v.as_str()).is_relative() {
                            *v = base.join(&*v).to_string_lossy().into_owned();
                        }
                    }
                }
                map
            }
            None => HashMap::new(),
        };
        let layer = Layered { file: &file };

        let hpc_trace = layer
            .get(args.hpc_trace.clone(), "hpc-trace")?
            .ok_or_else(|| CliError::input("--hpc-trace is required"))?;
        let demand_csv = layer.get(args.demand_csv.clone(), "demand-csv")?;
        let requests_csv = layer.get(args.requests_csv.clone(), "requests-csv")?;
        let demand_source = match (demand_csv, requests_csv) {
            (Some(p), None) => DemandSource::Csv(p),
            (None, Some(path)) => {
                let (autoscaler, target_peak, scale_factor) =
                    autoscaler_config(&args.autoscaler, &layer)?;
                DemandSource::Requests {
                    path,
                    scale_factor,
                    autoscaler,
                    target_peak,
                }
            }
            (Some(_), Some(_)) => {
                return Err(CliError::input(
                    "give either --demand-csv or --requests-csv, not both",
                ))
            }
            (None, None) => {
                return Err(CliError::input(
                    "one of --demand-csv or --requests-csv is required",
                ))
            }
        };

        let window_start = layer
            .get(args.window_start.clone(), "window-start")?
            .map(|s| s.parse::<WindowStart>())
            .transpose()
            .map_err(CliError::input)?
            .unwrap_or(WindowStart::Offset(0));
        let window_len = layer
            .get(args.window_len, "window-len")?
            .unwrap_or(TWO_WEEKS);
        if window_len == 0 {
            return Err(CliError::input("--window-len must be positive"));
        }
        let sizes = parse_sizes(
            &layer
                .get(args.sizes.clone(), "sizes")?
                .unwrap_or_else(|| DEFAULT_SIZES.to_string()),
        )
        .map_err(CliError::input)?;
        let static_split = layer
            .get(args.static_split.clone(), "static-split")?
            .map(|s| parse_pair(&s))
            .transpose()
            .map_err(CliError::input)?;
        let procs_per_node = layer
            .get(args.procs_per_node, "procs-per-node")?
            .unwrap_or(DEFAULT_PROCS_PER_NODE);
        if procs_per_node == 0 {
            return Err(CliError::input("--procs-per-node must be at least 1"));
        }

        Ok(Self {
            hpc_trace,
            demand_source,
            window_start,
            window_len,
            sizes,
            static_split,
            realloc_delay: layer
                .get(args.realloc_delay, "realloc-delay")?
                .unwrap_or(DEFAULT_REALLOC_DELAY),
            procs_per_node,
            out: layer
                .get(args.out.clone(), "out")?
                .unwrap_or_else(|| PathBuf::from("consolidsim-out")),
            event_log: layer.flag(args.event_log, "event-log")?,
            strict_fifo: layer.flag(args.strict_fifo, "strict-fifo")?,
        })
    }

    /// Simulation configurations, one per requested size. Static runs without
    /// an explicit split give the web pool exactly the peak demand.
    pub fn configs(&self, peak_demand: u32) -> Result<Vec<SimConfig>, CliError> {
        self.sizes
            .iter()
            .map(|s| {
                let cfg = if s.is_static {
                    let (st, ws) = match self.static_split {
                        Some(split) => split,
                        None if s.total > peak_demand => (s.total - peak_demand, peak_demand),
                        None => {
                            return Err(CliError::input(format!(
                                "static size {} leaves no batch nodes beside a peak demand of {peak_demand}",
                                s.total
                            )))
                        }
                    };
                    if st + ws != s.total {
                        return Err(CliError::input(format!(
                            "static split {st},{ws} does not add up to {}",
                            s.total
                        )));
                    }
                    SimConfig::static_split(st, ws)
                } else {
                    SimConfig::dynamic(s.total)
                };
                Ok(cfg
                    .with_realloc_delay(self.realloc_delay)
                    .with_strict_fifo(self.strict_fifo))
            })
            .collect()
    }
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn with_path<E: Display>(path: &Path) -> impl FnOnce(E) -> CliError + '_ {
    move |e| CliError::input(format!("{}: {e}", path.display()))
}

/// Loads and windows an SWF trace. Returns the jobs and the skipped-line count.
pub fn load_jobs(
    path: &Path,
    procs_per_node: u32,
    start: WindowStart,
    len: Seconds,
) -> Result<(Vec<JobRecord>, usize), CliError> {
    let trace = traces::parse_swf(open(path)?, procs_per_node).map_err(with_path(path))?;
    let jobs = match start {
        WindowStart::Offset(s) => traces::window_jobs(&trace.jobs, s, len),
        WindowStart::Unix(u) => {
            traces::window_at_instant(&trace, u, len).map_err(with_path(path))?
        }
    };
    Ok((jobs, trace.skipped))
}

/// Builds the demand series from either source. Returns it with the
/// per-instance capacity used, when derived.
pub fn load_demand(source: &DemandSource) -> Result<(DemandSeries, Option<f64>), CliError> {
    match source {
        DemandSource::Csv(path) => {
            let parsed = traces::parse_demand_series(open(path)?).map_err(with_path(path))?;
            if parsed.clamped > 0 {
                eprintln!(
                    "{}: raised {} demand value(s) to 1",
                    path.display(),
                    parsed.clamped
                );
            }
            Ok((parsed.series, None))
        }
        DemandSource::Requests {
            path,
            scale_factor,
            autoscaler: cfg,
            target_peak,
        } => {
            let requests = traces::parse_request_csv(open(path)?).map_err(with_path(path))?;
            let requests =
                traces::scale_requests(&requests, *scale_factor).map_err(CliError::input)?;
            let mut cfg = *cfg;
            if let Some(peak) = target_peak {
                cfg.capacity_per_instance = autoscaler::calibrate_capacity(&requests, &cfg, *peak)
                    .map_err(CliError::input)?;
            }
            let demand = autoscaler::derive_demand(&requests, &cfg).map_err(CliError::input)?;
            Ok((demand, Some(cfg.capacity_per_instance)))
        }
    }
}

fn write_file(
    path: &Path,
    f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
) -> Result<(), CliError> {
    let file = File::create(path).map_err(with_path(path))?;
    let mut w = BufWriter::new(file);
    f(&mut w).and_then(|_| w.flush()).map_err(with_path(path))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |x| format!("{x:.1}"))
}

pub fn cmd_run(spec: &ExperimentSpec) -> Result<i32, CliError> {
    let (jobs, skipped) = load_jobs(
        &spec.hpc_trace,
        spec.procs_per_node,
        spec.window_start,
        spec.window_len,
    )?;
    let (demand, capacity) = load_demand(&spec.demand_source)?;
    if let Some(c) = capacity {
        println!(
            "derived demand: peak {} with capacity {c:.6} req/s per instance",
            demand.peak()
        );
    }
    let configs = spec.configs(demand.peak())?;
    let smallest = configs
        .iter()
        .map(SimConfig::st_capacity)
        .min()
        .unwrap_or(0);
    let (jobs, rejected) = traces::reject_oversized(&jobs, smallest);
    println!(
        "jobs: {} (skipped {skipped}, rejected {rejected} larger than {smallest} nodes)",
        jobs.len()
    );

    fs::create_dir_all(&spec.out).map_err(with_path(&spec.out))?;
    let results = engine::run_sweep(&jobs, &demand, &configs, spec.event_log);
    let mut reports = Vec::with_capacity(results.len());
    for result in results {
        let (report, log) = result.map_err(CliError::input)?;
        let dir = &spec.out;
        write_file(&dir.join(format!("run_{}.csv", report.label)), |w| {
            metrics::write_runs_csv(w, &[&report])
        })?;
        write_file(&dir.join(format!("run_{}.json", report.label)), |w| {
            metrics::write_report_json(&mut *w, &report)?;
            writeln!(w)
        })?;
        write_file(
            &dir.join(format!("utilization_{}.csv", report.label)),
            |w| metrics::write_utilization_csv(w, &report),
        )?;
        if spec.event_log {
            write_file(&dir.join(format!("events_{}.tsv", report.label)), |w| {
                log.iter().try_for_each(|line| writeln!(w, "{line}"))
            })?;
        }
        reports.push(report);
    }
    let refs: Vec<&RunReport> = reports.iter().collect();
    write_file(&spec.out.join("runs.csv"), |w| {
        metrics::write_runs_csv(w, &refs)
    })?;

    println!(
        "{:<14} {:>9} {:>9} {:>7} {:>14} {:>12}",
        "config", "completed", "in-window", "killed", "turnaround(s)", "ws-satisfied"
    );
    for r in &reports {
        println!(
            "{:<14} {:>9} {:>9} {:>7} {:>14} {:>12.4}",
            r.label,
            r.completed_count,
            r.in_window.completed,
            r.killed_count,
            fmt_opt(r.mean_turnaround),
            r.ws_demand_satisfaction
        );
    }
    if reports.len() >= 2 && reports.iter().any(|r| r.mode == "static") {
        let cmp = metrics::compare(&reports).map_err(CliError::input)?;
        write_file(&spec.out.join("comparison.csv"), |w| {
            metrics::write_comparison_csv(w, &cmp)
        })?;
        write_file(&spec.out.join("comparison.json"), |w| {
            serde_json::to_writer_pretty(&mut *w, &cmp).map_err(std::io::Error::other)?;
            writeln!(w)
        })?;
        for row in cmp.rows.iter().filter(|r| r.label != cmp.baseline) {
            println!(
                "{}: cost ratio {:.3} vs {}",
                row.label, row.cost_ratio, cmp.baseline
            );
        }
    }
    let infeasible: Vec<_> = reports
        .iter()
        .filter(|r| r.demand_exceeds_capacity)
        .map(|r| r.label.as_str())
        .collect();
    if infeasible.is_empty() {
        Ok(EXIT_OK)
    } else {
        eprintln!(
            "peak web demand exceeds capacity in: {}",
            infeasible.join(", ")
        );
        Ok(EXIT_INFEASIBLE)
    }
}

pub fn cmd_derive_demand(args: &DeriveArgs) -> Result<i32, CliError> {
    let empty = HashMap::new();
    let (autoscaler, target_peak, scale_factor) =
        autoscaler_config(&args.autoscaler, &Layered { file: &empty })?;
    let source = DemandSource::Requests {
        path: args.requests_csv.clone(),
        scale_factor,
        autoscaler,
        target_peak,
    };
    let (demand, capacity) = load_demand(&source)?;
    write_file(&args.out, |w| traces::write_demand_csv(w, &demand))?;
    println!("peak: {}", demand.peak());
    println!("changes: {}", demand.change_count());
    if let Some(c) = capacity {
        println!("capacity: {c:.6}");
    }
    Ok(EXIT_OK)
}

pub fn cmd_validate(args: &ValidateArgs) -> Result<i32, CliError> {
    if args.hpc_trace.is_none() && args.demand_csv.is_none() && args.requests_csv.is_none() {
        return Err(CliError::input("nothing to validate"));
    }
    if let Some(path) = &args.hpc_trace {
        let start = args
            .window_start
            .as_deref()
            .map(str::parse::<WindowStart>)
            .transpose()
            .map_err(CliError::input)?;
        let ppn = args.procs_per_node.unwrap_or(DEFAULT_PROCS_PER_NODE);
        let trace = traces::parse_swf(open(path)?, ppn).map_err(with_path(path))?;
        let span = trace.jobs.iter().map(|j| j.submit_time).max().unwrap_or(0);
        println!("trace jobs: {}", trace.jobs.len());
        println!("skipped: {}", trace.skipped);
        println!("trace span: {span} s");
        let jobs = match start {
            None => trace.jobs.clone(),
            Some(start) => {
                let len = args.window_len.unwrap_or(TWO_WEEKS);
                load_jobs(path, ppn, start, len)?.0
            }
        };
        println!("jobs: {}", jobs.len());
        if let Some(max) = jobs.iter().map(|j| j.requested_nodes).max() {
            println!("max job size: {max} nodes");
        }
        if let (Some(first), Some(last)) = (
            jobs.iter().map(|j| j.submit_time).min(),
            jobs.iter().map(|j| j.submit_time).max(),
        ) {
            println!("window coverage: submits from {first} s to {last} s");
        }
    }
    if let Some(path) = &args.demand_csv {
        let (demand, _) = load_demand(&DemandSource::Csv(path.clone()))?;
        println!("peak: {}", demand.peak());
        println!("demand changes: {}", demand.change_count());
        println!("mean demand: {:.3}", demand.mean());
        println!("demand duration: {} s", demand.duration());
    }
    if let Some(path) = &args.requests_csv {
        let requests = traces::parse_request_csv(open(path)?).map_err(with_path(path))?;
        println!("request samples: {}", requests.samples().len());
        println!("peak rate: {:.3}", requests.peak_rate());
        println!("request duration: {} s", requests.duration());
    }
    Ok(EXIT_OK)
}

/// Parses `args` (including the program name) and runs the chosen command.
/// Returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.command {
        Command::Run(args) => ExperimentSpec::resolve(args).and_then(|spec| cmd_run(&spec)),
        Command::DeriveDemand(args) => cmd_derive_demand(args),
        Command::Validate(args) => cmd_validate(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes_parse() {
        let s = parse_sizes("208:static, 160").unwrap();
        assert_eq!(
            s,
            vec![
                SizeSpec {
                    total: 208,
                    is_static: true
                },
                SizeSpec {
                    total: 160,
                    is_static: false
                }
            ]
        );
        assert_eq!(parse_sizes(DEFAULT_SIZES).unwrap().len(), 7);
        assert!(parse_sizes("").is_err());
        assert!(parse_sizes("10:shared").is_err());
        assert!(parse_sizes("0").is_err());
    }

    #[test]
    fn window_start_forms() {
        assert_eq!("120".parse::<WindowStart>(), Ok(WindowStart::Offset(120)));
        assert_eq!(
            "unix:956700003".parse::<WindowStart>(),
            Ok(WindowStart::Unix(956_700_003))
        );
        assert!("soon".parse::<WindowStart>().is_err());
    }

    #[test]
    fn flags_override_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("exp.conf");
        fs::write(
            &cfg,
            "# experiment\nhpc-trace = a.swf\ndemand-csv = d.csv\nsizes = 29:static,22\nrealloc-delay = 9\nstrict-fifo = true\n",
        )
        .unwrap();
        let args = RunArgs {
            config: Some(cfg),
            realloc_delay: Some(3),
            ..Default::default()
        };
        let spec = ExperimentSpec::resolve(&args).unwrap();
        assert_eq!(spec.hpc_trace, dir.path().join("a.swf"));
        assert_eq!(spec.realloc_delay, 3);
        assert!(spec.strict_fifo);
        assert_eq!(spec.sizes.len(), 2);
        assert_eq!(spec.window_len, TWO_WEEKS);
    }

    #[test]
    fn static_split_defaults_to_peak_demand() {
        let args = RunArgs {
            hpc_trace: Some("a".into()),
            demand_csv: Some("d".into()),
            ..Default::default()
        };
        let spec = ExperimentSpec::resolve(&args).unwrap();
        let configs = spec.configs(64).unwrap();
        assert_eq!(configs[0], SimConfig::static_split(144, 64));
        assert_eq!(configs.len(), 7);

        let bad = ExperimentSpec {
            static_split: Some((100, 64)),
            ..spec
        };
        assert_eq!(bad.configs(64).unwrap_err().code, EXIT_INPUT);
    }

    #[test]
    fn demand_source_required() {
        let args = RunArgs {
            hpc_trace: Some("a".into()),
            ..Default::default()
        };
        assert_eq!(ExperimentSpec::resolve(&args).unwrap_err().code, EXIT_INPUT);
    }
}
