//! First-Fit batch scheduling.

use std::collections::HashSet;

use thiserror::Error;

use crate::traces::JobRecord;
use crate::{JobId, Seconds};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SchedulerError {
    #[error("job {0} is already queued")]
    Duplicate(JobId),
    #[error("job {0} is not queued")]
    Missing(JobId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QueuedJob {
    pub job_id: JobId,
    pub size: u32,
    pub runtime: Seconds,
    pub submit_time: Seconds,
}

impl From<&JobRecord> for QueuedJob {
    fn from(j: &JobRecord) -> Self {
        Self {
            job_id: j.job_id,
            size: j.requested_nodes,
            runtime: j.runtime,
            submit_time: j.submit_time,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QueuePolicy {
    /// Start every job that fits, skipping those that do not.
    #[default]
    FirstFit,
    /// Stop at the first job that does not fit.
    StrictFifo,
}

/// Pending jobs ordered by submit time, ties by job id.
#[derive(Debug, Clone, Default)]
pub struct JobQueue {
    pending: Vec<QueuedJob>,
    ids: HashSet<JobId>,
}

impl JobQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.pending.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pending.is_empty()
    }

    pub fn pending(&self) -> &[QueuedJob] {
        &self.pending
    }

    pub fn enqueue(&mut self, job: QueuedJob) -> Result<(), SchedulerError> {
        if !self.ids.insert(job.job_id) {
            return Err(SchedulerError::Duplicate(job.job_id));
        }
        let key = (job.submit_time, job.job_id);
        let at = self
            .pending
            .partition_point(|q| (q.submit_time, q.job_id) <= key);
        self.pending.insert(at, job);
        Ok(())
    }

    /// Removes the given jobs and returns them in the order of `ids`.
    /// Nothing is removed if any id is missing.
    pub fn dequeue_selected(&mut self, ids: &[JobId]) -> Result<Vec<QueuedJob>, SchedulerError> {
        if let Some(&missing) = ids.iter().find(|id| !self.ids.contains(id)) {
            return Err(SchedulerError::Missing(missing));
        }
        let wanted: HashSet<JobId> = ids.iter().copied().collect();
        let mut taken = Vec::with_capacity(ids.len());
        self.pending.retain(|q| {
            if wanted.contains(&q.job_id) {
                taken.push(*q);
                false
            } else {
                true
            }
        });
        for id in ids {
            self.ids.remove(id);
        }
        taken.sort_by_key(|q| ids.iter().position(|id| *id == q.job_id));
        Ok(taken)
    }

    /// Jobs to start given `free_nodes`, in scan order.
    pub fn schedule_pass(&self, free_nodes: u32, policy: QueuePolicy) -> Vec<JobId> {
        let mut remaining = free_nodes;
        let mut selected = Vec::new();
        for job in &self.pending {
            if job.size <= remaining {
                remaining -= job.size;
                selected.push(job.job_id);
            } else if policy == QueuePolicy::StrictFifo {
                break;
            }
            if remaining == 0 {
                break;
            }
        }
        selected
    }
}
