//! Discrete-event core.
//!
//! Four event kinds drive a run: job submissions and completions from the HPC
//! trace, web-tier demand changes from the demand series, and the arrival of
//! nodes reallocated to the web tier. Events sharing a timestamp are applied
//! in kind order (finish, demand, reallocation, submit) and then by insertion
//! sequence. Once every event at an instant has been applied the engine
//! settles the instant: the web tier releases or claims nodes, idle nodes go
//! to the batch tier, and the First-Fit scheduler starts what fits.
//!
//! In static mode the two tiers own disjoint pools and nothing moves between
//! them; the web pool's unused nodes sit idle.
//!
//! The web tier is retired at the end of the demand series: it releases all
//! of its nodes and the remaining batch jobs drain to completion.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BinaryHeap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cluster::{ClusterError, ClusterState, Tenant};
use crate::metrics::{self, JobOutcome, JobState, MetricsError, RunReport, UtilSample};
use crate::policies::{
    self, PolicyDecision, PolicyError, ReclaimOrder, RunningJobView, WsAdjustment,
};
use crate::scheduler::{JobQueue, QueuePolicy, QueuedJob, SchedulerError};
use crate::traces::{DemandSeries, JobRecord};
use crate::{JobId, Seconds};

pub const DEFAULT_REALLOC_DELAY: Seconds = 5;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("job {job_id} needs {size} node(s) but the batch tier can hold at most {capacity}")]
    InfeasibleJob {
        job_id: JobId,
        size: u32,
        capacity: u32,
    },
    #[error("job id {0} appears more than once")]
    DuplicateJob(JobId),
    #[error("node partition violated at t={0}")]
    ConservationViolated(Seconds),
    #[error("{0} job(s) never ran to an end state")]
    Unfinished(usize),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error(transparent)]
    Scheduler(#[from] SchedulerError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    /// Dedicated pools with no flow between them.
    Static { st_nodes: u32, ws_nodes: u32 },
    /// One shared pool under the cooperative policies.
    Dynamic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    pub total_nodes: u32,
    pub mode: Mode,
    pub realloc_delay: Seconds,
    pub strict_fifo: bool,
}

impl SimConfig {
    pub fn dynamic(total_nodes: u32) -> Self {
        Self {
            total_nodes,
            mode: Mode::Dynamic,
            realloc_delay: DEFAULT_REALLOC_DELAY,
            strict_fifo: false,
        }
    }

    pub fn static_split(st_nodes: u32, ws_nodes: u32) -> Self {
        Self {
            total_nodes: st_nodes + ws_nodes,
            mode: Mode::Static { st_nodes, ws_nodes },
            realloc_delay: DEFAULT_REALLOC_DELAY,
            strict_fifo: false,
        }
    }

    pub fn with_realloc_delay(mut self, delay: Seconds) -> Self {
        self.realloc_delay = delay;
        self
    }

    pub fn with_strict_fifo(mut self, strict: bool) -> Self {
        self.strict_fifo = strict;
        self
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        if self.total_nodes == 0 {
            return Err(EngineError::InvalidConfig("cluster has no nodes".into()));
        }
        if let Mode::Static { st_nodes, ws_nodes } = self.mode {
            if st_nodes + ws_nodes != self.total_nodes {
                return Err(EngineError::InvalidConfig(format!(
                    "static split {st_nodes}+{ws_nodes} does not add up to {} nodes",
                    self.total_nodes
                )));
            }
        }
        Ok(())
    }

    /// Largest job the batch tier can ever run.
    pub fn st_capacity(&self) -> u32 {
        match self.mode {
            Mode::Static { st_nodes, .. } => st_nodes,
            Mode::Dynamic => self.total_nodes,
        }
    }

    /// Largest demand the web tier can ever hold.
    pub fn ws_capacity(&self) -> u32 {
        match self.mode {
            Mode::Static { ws_nodes, .. } => ws_nodes,
            Mode::Dynamic => self.total_nodes,
        }
    }

    pub fn label(&self) -> String {
        match self.mode {
            Mode::Static { .. } => format!("static-{}", self.total_nodes),
            Mode::Dynamic => format!("dynamic-{}", self.total_nodes),
        }
    }

    fn queue_policy(&self) -> QueuePolicy {
        if self.strict_fifo {
            QueuePolicy::StrictFifo
        } else {
            QueuePolicy::FirstFit
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventKind {
    JobFinish(JobId),
    /// New web-tier demand; 0 marks the end of the demand series.
    DemandChange(u32),
    ReallocationReady,
    JobSubmit(JobId),
}

impl EventKind {
    fn rank(&self) -> u8 {
        match self {
            EventKind::JobFinish(_) => 0,
            EventKind::DemandChange(_) => 1,
            EventKind::ReallocationReady => 2,
            EventKind::JobSubmit(_) => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimEvent {
    pub time: Seconds,
    pub seq: u64,
    pub kind: EventKind,
}

impl SimEvent {
    fn key(&self) -> (Seconds, u8, u64) {
        (self.time, self.kind.rank(), self.seq)
    }
}

impl Ord for SimEvent {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl PartialOrd for SimEvent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct Simulation<'a> {
    cfg: SimConfig,
    jobs: BTreeMap<JobId, &'a JobRecord>,
    outcomes: BTreeMap<JobId, JobOutcome>,
    running: BTreeMap<JobId, Seconds>,
    cluster: ClusterState,
    queue: JobQueue,
    events: BinaryHeap<Reverse<SimEvent>>,
    next_seq: u64,
    ws_target: u32,
    ws_series: Vec<(Seconds, u32)>,
    util_series: Vec<UtilSample>,
    log: Option<Vec<String>>,
}

impl<'a> Simulation<'a> {
    fn new(
        jobs: &'a [JobRecord],
        demand: &DemandSeries,
        cfg: SimConfig,
    ) -> Result<Self, EngineError> {
        cfg.validate()?;
        let capacity = cfg.st_capacity();
        let mut by_id = BTreeMap::new();
        let mut seen = HashSet::new();
        for job in jobs {
            if !seen.insert(job.job_id) {
                return Err(EngineError::DuplicateJob(job.job_id));
            }
            if job.requested_nodes > capacity {
                return Err(EngineError::InfeasibleJob {
                    job_id: job.job_id,
                    size: job.requested_nodes,
                    capacity,
                });
            }
            by_id.insert(job.job_id, job);
        }

        let mut cluster = ClusterState::new(cfg.total_nodes);
        if let Mode::Static { st_nodes, .. } = cfg.mode {
            cluster.allocate(Tenant::St, st_nodes)?;
        }

        let mut sim = Self {
            cfg,
            jobs: by_id,
            outcomes: BTreeMap::new(),
            running: BTreeMap::new(),
            cluster,
            queue: JobQueue::new(),
            events: BinaryHeap::new(),
            next_seq: 0,
            ws_target: 0,
            ws_series: Vec::new(),
            util_series: Vec::new(),
            log: None,
        };

        let samples = demand.samples();
        sim.push(0, EventKind::DemandChange(samples[0].1));
        for &(t, d) in &samples[1..] {
            sim.push(t, EventKind::DemandChange(d));
        }
        sim.push(demand.duration(), EventKind::DemandChange(0));
        for job in jobs {
            sim.push(job.submit_time, EventKind::JobSubmit(job.job_id));
        }
        Ok(sim)
    }

    fn push(&mut self, time: Seconds, kind: EventKind) {
        let seq = self.next_seq;
        self.next_seq += 1;
        self.events.push(Reverse(SimEvent { time, seq, kind }));
    }

    fn log(&mut self, time: Seconds, kind: &str, payload: impl std::fmt::Display) {
        if let Some(log) = self.log.as_mut() {
            log.push(format!("{time}\t{kind}\t{payload}"));
        }
    }

    fn check(&self, t: Seconds) -> Result<(), EngineError> {
        if self.cluster.conservation_check() {
            Ok(())
        } else {
            Err(EngineError::ConservationViolated(t))
        }
    }

    fn run(&mut self) -> Result<Seconds, EngineError> {
        let mut clock = 0;
        while let Some(&Reverse(head)) = self.events.peek() {
            let t = head.time;
            clock = t;
            self.cluster.advance_to(t);
            while let Some(&Reverse(ev)) = self.events.peek() {
                if ev.time != t {
                    break;
                }
                self.events.pop();
                self.apply(ev)?;
                self.check(t)?;
            }
            self.settle(t)?;
            self.check(t)?;
            self.record(t);
        }
        let unfinished = self
            .outcomes
            .values()
            .filter(|o| !matches!(o.state, JobState::Completed | JobState::Killed))
            .count()
            + (self.jobs.len() - self.outcomes.len());
        if unfinished > 0 {
            return Err(EngineError::Unfinished(unfinished));
        }
        Ok(clock)
    }

    fn apply(&mut self, ev: SimEvent) -> Result<(), EngineError> {
        let t = ev.time;
        match ev.kind {
            EventKind::JobFinish(id) => {
                let live = self.running.get(&id).copied();
                let Some(start) = live else {
                    // killed before it could finish
                    return Ok(());
                };
                debug_assert_eq!(start + self.jobs[&id].runtime, t);
                self.cluster.release_job(id)?;
                self.running.remove(&id);
                let o = self
                    .outcomes
                    .get_mut(&id)
                    .expect("running job has an outcome");
                o.end = Some(t);
                o.state = JobState::Completed;
                self.log(t, "JobFinish", id);
            }
            EventKind::DemandChange(d) => {
                self.ws_target = d;
                self.log(t, "DemandChange", d);
            }
            EventKind::ReallocationReady => {
                let landed = self.cluster.land_transits();
                self.log(t, "ReallocationReady", landed);
            }
            EventKind::JobSubmit(id) => {
                let job = self.jobs[&id];
                self.queue.enqueue(QueuedJob::from(job))?;
                self.outcomes.insert(
                    id,
                    JobOutcome {
                        job_id: id,
                        size: job.requested_nodes,
                        runtime: job.runtime,
                        submit: job.submit_time,
                        start: None,
                        end: None,
                        state: JobState::Queued,
                    },
                );
                self.log(t, "JobSubmit", id);
            }
        }
        Ok(())
    }

    fn settle(&mut self, t: Seconds) -> Result<(), EngineError> {
        match self.cfg.mode {
            Mode::Dynamic => self.settle_web_dynamic(t)?,
            Mode::Static { .. } => self.settle_web_static()?,
        }
        self.schedule(t)
    }

    fn settle_web_dynamic(&mut self, t: Seconds) -> Result<(), EngineError> {
        let held = self.cluster.ws_held_count();
        let have = held + self.cluster.in_transit_count();
        match policies::ws_adjust(have, self.ws_target) {
            WsAdjustment::Release(k) => {
                // nodes still in transit are released when they land
                self.cluster.ws_release(k.min(held))?;
            }
            WsAdjustment::Claim(k) => {
                // demand beyond the whole pool stays unmet
                let claim = k.min(self.cfg.total_nodes - have);
                if claim > 0 {
                    let idle = self.cluster.idle_count();
                    for decision in policies::provision_on_ws_claim(claim, idle) {
                        match decision {
                            PolicyDecision::GrantToWs(g) => {
                                self.cluster.allocate(Tenant::Ws, g)?;
                            }
                            PolicyDecision::ReclaimFromSt(r) => self.apply_reclaim(
                                t,
                                ReclaimOrder {
                                    demanded: r,
                                    deadline_hint: self.cfg.realloc_delay,
                                },
                            )?,
                            _ => unreachable!("claim split yields grants and reclaims only"),
                        }
                    }
                }
            }
            WsAdjustment::Hold => {}
        }
        if let PolicyDecision::GrantIdleToSt(n) =
            policies::provision_on_idle(self.cluster.idle_count())
        {
            self.cluster.allocate(Tenant::St, n)?;
        }
        Ok(())
    }

    fn settle_web_static(&mut self) -> Result<(), EngineError> {
        match policies::ws_adjust(self.cluster.ws_held_count(), self.ws_target) {
            WsAdjustment::Release(k) => {
                self.cluster.ws_release(k)?;
            }
            WsAdjustment::Claim(k) => {
                let grant = k.min(self.cluster.idle_count());
                self.cluster.allocate(Tenant::Ws, grant)?;
            }
            WsAdjustment::Hold => {}
        }
        Ok(())
    }

    /// Forces the batch tier to hand `order.demanded` nodes to the web tier.
    /// Victims die now; the nodes reach the web tier after the reallocation delay.
    fn apply_reclaim(&mut self, t: Seconds, order: ReclaimOrder) -> Result<(), EngineError> {
        let views: Vec<RunningJobView> = self
            .running
            .iter()
            .map(|(&job_id, &start)| RunningJobView {
                job_id,
                size: self.jobs[&job_id].requested_nodes,
                elapsed: t - start,
            })
            .collect();
        let plan = policies::st_release_plan(order.demanded, self.cluster.st_free_count(), &views)?;
        for &victim in &plan.victims {
            self.cluster.release_job(victim)?;
            self.running.remove(&victim);
            let o = self
                .outcomes
                .get_mut(&victim)
                .expect("victim has an outcome");
            o.end = Some(t);
            o.state = JobState::Killed;
            self.log(t, "JobKill", victim);
        }
        self.cluster.st_return(plan.released)?;
        if order.deadline_hint == 0 {
            self.cluster.allocate(Tenant::Ws, plan.released)?;
        } else {
            let ready = t + order.deadline_hint;
            self.cluster.dispatch_to_ws(plan.released, ready)?;
            self.push(ready, EventKind::ReallocationReady);
        }
        Ok(())
    }

    fn schedule(&mut self, t: Seconds) -> Result<(), EngineError> {
        let ids = self
            .queue
            .schedule_pass(self.cluster.st_free_count(), self.cfg.queue_policy());
        if ids.is_empty() {
            return Ok(());
        }
        for job in self.queue.dequeue_selected(&ids)? {
            self.cluster.bind_job(job.job_id, job.size)?;
            self.running.insert(job.job_id, t);
            let o = self
                .outcomes
                .get_mut(&job.job_id)
                .expect("queued job has an outcome");
            o.start = Some(t);
            o.state = JobState::Running;
            self.push(t + job.runtime, EventKind::JobFinish(job.job_id));
            self.log(t, "JobStart", job.job_id);
        }
        Ok(())
    }

    fn record(&mut self, t: Seconds) {
        let ws = self.cluster.ws_held_count();
        if self.ws_series.last().map(|&(_, h)| h) != Some(ws) {
            self.ws_series.push((t, ws));
        }
        let st = self.cluster.st_busy_count();
        let sample = UtilSample {
            time: t,
            st,
            ws,
            idle: self.cfg.total_nodes - st - ws,
        };
        if self
            .util_series
            .last()
            .is_none_or(|u| (u.st, u.ws, u.idle) != (st, ws, sample.idle))
        {
            self.util_series.push(sample);
        }
    }
}

fn execute(
    jobs: &[JobRecord],
    demand: &DemandSeries,
    cfg: &SimConfig,
    with_log: bool,
) -> Result<(RunReport, Vec<String>), EngineError> {
    let mut sim = Simulation::new(jobs, demand, *cfg)?;
    if with_log {
        sim.log = Some(Vec::new());
    }
    let makespan = sim.run()?;
    let report = metrics::finalize(
        sim.outcomes.into_values().collect(),
        sim.ws_series,
        sim.util_series,
        demand,
        cfg,
        metrics::trace_identity(jobs, demand),
        makespan,
    )?;
    Ok((report, sim.log.unwrap_or_default()))
}

/// Simulates one configuration over the given job stream and demand series.
pub fn run(
    jobs: &[JobRecord],
    demand: &DemandSeries,
    cfg: &SimConfig,
) -> Result<RunReport, EngineError> {
    execute(jobs, demand, cfg, false).map(|(report, _)| report)
}

/// Like [`run`], also returning the event log as `time\tkind\tpayload` lines.
pub fn run_with_log(
    jobs: &[JobRecord],
    demand: &DemandSeries,
    cfg: &SimConfig,
) -> Result<(RunReport, Vec<String>), EngineError> {
    execute(jobs, demand, cfg, true)
}

/// Runs several configurations on separate threads. Results are returned in
/// the order of `configs`.
pub fn run_sweep(
    jobs: &[JobRecord],
    demand: &DemandSeries,
    configs: &[SimConfig],
    with_log: bool,
) -> Vec<Result<(RunReport, Vec<String>), EngineError>> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = configs
            .iter()
            .map(|cfg| scope.spawn(move || execute(jobs, demand, cfg, with_log)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("simulation thread panicked"))
            .collect()
    })
}
