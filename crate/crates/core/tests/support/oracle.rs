//! Brute-force reference simulator.
//!
//! Steps the clock one second at a time and tracks node counts only, no node
//! identities and no event queue. Every second it retires finished jobs, reads
//! the demand, lands reallocated nodes, admits submissions, then rebalances
//! and runs a First-Fit pass.

use std::collections::BTreeMap;

use consolidsim::metrics::{JobState, RunReport};
use consolidsim::traces::{DemandSeries, JobRecord};
use consolidsim::{Mode, SimConfig};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleJob {
    pub start: Option<u64>,
    pub end: Option<u64>,
    pub killed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    pub jobs: BTreeMap<u64, OracleJob>,
    pub ws_series: Vec<(u64, u32)>,
}

struct Running {
    id: u64,
    size: u32,
    start: u64,
    runtime: u64,
}

pub fn simulate(jobs: &[JobRecord], demand: &DemandSeries, cfg: &SimConfig) -> OracleResult {
    let dynamic = matches!(cfg.mode, Mode::Dynamic);
    let (mut st_free, mut idle) = match cfg.mode {
        Mode::Static { st_nodes, ws_nodes } => (st_nodes, ws_nodes),
        Mode::Dynamic => (0, cfg.total_nodes),
    };
    let mut held = 0u32;
    let mut transit: Vec<(u64, u32)> = Vec::new();
    let mut running: Vec<Running> = Vec::new();
    let mut queue: Vec<&JobRecord> = Vec::new();
    let mut out: BTreeMap<u64, OracleJob> = jobs
        .iter()
        .map(|j| {
            (
                j.job_id,
                OracleJob {
                    start: None,
                    end: None,
                    killed: false,
                },
            )
        })
        .collect();
    let mut ws_series: Vec<(u64, u32)> = Vec::new();
    let last_submit = jobs.iter().map(|j| j.submit_time).max().unwrap_or(0);

    let mut t = 0u64;
    loop {
        // finishes
        let mut i = 0;
        while i < running.len() {
            if running[i].start + running[i].runtime == t {
                let r = running.remove(i);
                st_free += r.size;
                out.get_mut(&r.id).unwrap().end = Some(t);
            } else {
                i += 1;
            }
        }

        let target = if t >= demand.duration() {
            0
        } else {
            let mut d = 0;
            for &(ts, v) in demand.samples() {
                if ts <= t {
                    d = v;
                }
            }
            d
        };

        // landings
        let mut i = 0;
        while i < transit.len() {
            if transit[i].0 == t {
                held += transit[i].1;
                transit.remove(i);
            } else {
                i += 1;
            }
        }

        for j in jobs.iter().filter(|j| j.submit_time == t) {
            queue.push(j);
        }
        queue.sort_by(|a, b| {
            a.submit_time
                .cmp(&b.submit_time)
                .then(a.job_id.cmp(&b.job_id))
        });

        if dynamic {
            let moving: u32 = transit.iter().map(|&(_, n)| n).sum();
            let have = held + moving;
            if have > target {
                let drop = (have - target).min(held);
                held -= drop;
                idle += drop;
            } else if have < target {
                let want = (target - have).min(cfg.total_nodes - have);
                let from_idle = want.min(idle);
                idle -= from_idle;
                held += from_idle;
                let mut need = want - from_idle;
                if need > 0 {
                    let handed = need;
                    // take free batch nodes, then kill the smallest, youngest jobs
                    let take = need.min(st_free);
                    st_free -= take;
                    need -= take;
                    while need > 0 {
                        let mut pick = 0;
                        for k in 1..running.len() {
                            let a = &running[k];
                            let b = &running[pick];
                            let ea = t - a.start;
                            let eb = t - b.start;
                            if a.size < b.size
                                || (a.size == b.size && ea < eb)
                                || (a.size == b.size && ea == eb && a.id < b.id)
                            {
                                pick = k;
                            }
                        }
                        let victim = running.remove(pick);
                        let o = out.get_mut(&victim.id).unwrap();
                        o.end = Some(t);
                        o.killed = true;
                        if victim.size >= need {
                            st_free += victim.size - need;
                            need = 0;
                        } else {
                            need -= victim.size;
                        }
                    }
                    if cfg.realloc_delay == 0 {
                        held += handed;
                    } else {
                        transit.push((t + cfg.realloc_delay, handed));
                    }
                }
            }
            st_free += idle;
            idle = 0;
        } else if held > target {
            idle += held - target;
            held = target;
        } else {
            let add = (target - held).min(idle);
            idle -= add;
            held += add;
        }

        // First-Fit, or strict FIFO
        let mut kept = Vec::new();
        let mut blocked = false;
        for j in queue.drain(..) {
            if !blocked && j.requested_nodes <= st_free {
                st_free -= j.requested_nodes;
                running.push(Running {
                    id: j.job_id,
                    size: j.requested_nodes,
                    start: t,
                    runtime: j.runtime,
                });
                out.get_mut(&j.job_id).unwrap().start = Some(t);
            } else {
                if cfg.strict_fifo {
                    blocked = true;
                }
                kept.push(j);
            }
        }
        queue = kept;

        if ws_series.last().map(|&(_, h)| h) != Some(held) {
            ws_series.push((t, held));
        }

        let done = t >= demand.duration()
            && t >= last_submit
            && running.is_empty()
            && queue.is_empty()
            && transit.is_empty();
        if done {
            break;
        }
        t += 1;
    }

    for o in out.values_mut() {
        if o.killed {
            continue;
        }
        assert!(o.end.is_some(), "oracle left a job unfinished");
    }
    OracleResult {
        jobs: out,
        ws_series,
    }
}

/// Checks per-job start, end and fate plus the web holdings series.
pub fn agrees(report: &RunReport, expected: &OracleResult) -> Result<(), String> {
    for o in &report.job_outcomes {
        let e = &expected.jobs[&o.job_id];
        let killed = o.state == JobState::Killed;
        if (o.start, o.end, killed) != (e.start, e.end, e.killed) {
            return Err(format!(
                "job {}: engine start={:?} end={:?} killed={killed}, oracle {:?}",
                o.job_id, o.start, o.end, e
            ));
        }
    }
    if report.job_outcomes.len() != expected.jobs.len() {
        return Err("job count differs".into());
    }
    if report.ws_series != expected.ws_series {
        return Err(format!(
            "ws series: engine {:?}, oracle {:?}",
            report.ws_series, expected.ws_series
        ));
    }
    Ok(())
}
