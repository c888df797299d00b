//! The shared node pool.
//!
//! Every node is in exactly one place: idle with the provisioner, free or
//! busy with the batch (ST) tier, held by the web (WS) tier, or in transit
//! from the provisioner to the web tier.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::{JobId, NodeId, Seconds};

pub type NodeSet = BTreeSet<NodeId>;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ClusterError {
    #[error("requested {requested} idle node(s) but only {available} are idle")]
    InsufficientIdle { requested: u32, available: u32 },
    #[error("requested {requested} free ST node(s) but only {available} are free")]
    InsufficientFree { requested: u32, available: u32 },
    #[error("requested {requested} WS node(s) but the web tier holds {available}")]
    InsufficientHeld { requested: u32, available: u32 },
    #[error("job {0} is not bound to any node")]
    UnknownJob(JobId),
    #[error("job {0} is already bound")]
    AlreadyBound(JobId),
    #[error("cannot bind job {0} to zero nodes")]
    EmptyBinding(JobId),
    #[error("transit ready time {ready} is before the current time {now}")]
    TransitInPast { ready: Seconds, now: Seconds },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tenant {
    St,
    Ws,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transit {
    pub nodes: NodeSet,
    pub ready_time: Seconds,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterState {
    total_nodes: u32,
    now: Seconds,
    idle: NodeSet,
    st_free: NodeSet,
    st_busy: BTreeMap<JobId, NodeSet>,
    ws_held: NodeSet,
    in_transit: Vec<Transit>,
}

fn take(set: &mut NodeSet, count: u32) -> NodeSet {
    let mut out = NodeSet::new();
    for _ in 0..count {
        match set.pop_first() {
            Some(n) => {
                out.insert(n);
            }
            None => break,
        }
    }
    out
}

fn len(set: &NodeSet) -> u32 {
    set.len() as u32
}

impl ClusterState {
    /// A pool of `total_nodes` nodes, all idle.
    pub fn new(total_nodes: u32) -> Self {
        Self {
            total_nodes,
            now: 0,
            idle: (0..total_nodes).collect(),
            st_free: NodeSet::new(),
            st_busy: BTreeMap::new(),
            ws_held: NodeSet::new(),
            in_transit: Vec::new(),
        }
    }

    pub fn total_nodes(&self) -> u32 {
        self.total_nodes
    }

    pub fn now(&self) -> Seconds {
        self.now
    }

    /// Moves the clock forward. Never moves it backwards.
    pub fn advance_to(&mut self, t: Seconds) {
        self.now = self.now.max(t);
    }

    pub fn idle_count(&self) -> u32 {
        len(&self.idle)
    }

    pub fn st_free_count(&self) -> u32 {
        len(&self.st_free)
    }

    pub fn st_busy_count(&self) -> u32 {
        self.st_busy.values().map(len).sum()
    }

    pub fn ws_held_count(&self) -> u32 {
        len(&self.ws_held)
    }

    pub fn in_transit_count(&self) -> u32 {
        self.in_transit.iter().map(|t| len(&t.nodes)).sum()
    }

    pub fn ws_held(&self) -> &NodeSet {
        &self.ws_held
    }

    pub fn job_nodes(&self, job_id: JobId) -> Option<&NodeSet> {
        self.st_busy.get(&job_id)
    }

    pub fn in_transit(&self) -> &[Transit] {
        &self.in_transit
    }

    /// Moves `count` idle nodes straight to a tenant.
    pub fn allocate(&mut self, target: Tenant, count: u32) -> Result<NodeSet, ClusterError> {
        let available = self.idle_count();
        if count > available {
            return Err(ClusterError::InsufficientIdle {
                requested: count,
                available,
            });
        }
        let moved = take(&mut self.idle, count);
        match target {
            Tenant::St => self.st_free.extend(moved.iter().copied()),
            Tenant::Ws => self.ws_held.extend(moved.iter().copied()),
        }
        Ok(moved)
    }

    /// Sends `count` idle nodes towards the web tier; they land at `ready_time`.
    pub fn dispatch_to_ws(
        &mut self,
        count: u32,
        ready_time: Seconds,
    ) -> Result<NodeSet, ClusterError> {
        if ready_time < self.now {
            return Err(ClusterError::TransitInPast {
                ready: ready_time,
                now: self.now,
            });
        }
        let available = self.idle_count();
        if count > available {
            return Err(ClusterError::InsufficientIdle {
                requested: count,
                available,
            });
        }
        let nodes = take(&mut self.idle, count);
        if !nodes.is_empty() {
            self.in_transit.push(Transit {
                nodes: nodes.clone(),
                ready_time,
            });
        }
        Ok(nodes)
    }

    /// Hands every transit whose ready time has come to the web tier.
    /// Returns the number of nodes that landed.
    pub fn land_transits(&mut self) -> u32 {
        let now = self.now;
        let mut landed = 0;
        self.in_transit.retain(|t| {
            if t.ready_time <= now {
                landed += len(&t.nodes);
                self.ws_held.extend(t.nodes.iter().copied());
                false
            } else {
                true
            }
        });
        landed
    }

    /// Returns `count` free batch nodes to the provisioner.
    pub fn st_return(&mut self, count: u32) -> Result<NodeSet, ClusterError> {
        let available = self.st_free_count();
        if count > available {
            return Err(ClusterError::InsufficientFree {
                requested: count,
                available,
            });
        }
        let nodes = take(&mut self.st_free, count);
        self.idle.extend(nodes.iter().copied());
        Ok(nodes)
    }

    /// Returns `count` web-tier nodes to the provisioner.
    pub fn ws_release(&mut self, count: u32) -> Result<NodeSet, ClusterError> {
        let available = self.ws_held_count();
        if count > available {
            return Err(ClusterError::InsufficientHeld {
                requested: count,
                available,
            });
        }
        let nodes = take(&mut self.ws_held, count);
        self.idle.extend(nodes.iter().copied());
        Ok(nodes)
    }

    pub fn bind_job(&mut self, job_id: JobId, count: u32) -> Result<NodeSet, ClusterError> {
        if count == 0 {
            return Err(ClusterError::EmptyBinding(job_id));
        }
        if self.st_busy.contains_key(&job_id) {
            return Err(ClusterError::AlreadyBound(job_id));
        }
        let available = self.st_free_count();
        if count > available {
            return Err(ClusterError::InsufficientFree {
                requested: count,
                available,
            });
        }
        let nodes = take(&mut self.st_free, count);
        self.st_busy.insert(job_id, nodes.clone());
        Ok(nodes)
    }

    pub fn release_job(&mut self, job_id: JobId) -> Result<NodeSet, ClusterError> {
        let nodes = self
            .st_busy
            .remove(&job_id)
            .ok_or(ClusterError::UnknownJob(job_id))?;
        self.st_free.extend(nodes.iter().copied());
        Ok(nodes)
    }

    /// True iff the six holdings partition `0..total_nodes`, no binding is
    /// empty, and no transit is overdue.
    pub fn conservation_check(&self) -> bool {
        let mut seen = vec![false; self.total_nodes as usize];
        let mut count = 0usize;
        let sets = [&self.idle, &self.st_free, &self.ws_held]
            .into_iter()
            .chain(self.st_busy.values())
            .chain(self.in_transit.iter().map(|t| &t.nodes));
        for set in sets {
            for &n in set {
                match seen.get_mut(n as usize) {
                    Some(slot) if !*slot => *slot = true,
                    _ => return false,
                }
                count += 1;
            }
        }
        count == self.total_nodes as usize
            && self.st_busy.values().all(|s| !s.is_empty())
            && self.in_transit.iter().all(|t| t.ready_time >= self.now)
    }
}
