//! Cooperative provisioning and release rules, as pure decision functions.
//!
//! - Provisioner: web-tier claims come first and are always urgent; whatever
//!   idle nodes remain go to the batch tier.
//! - Batch tier: gives nodes back immediately when asked, from its free pool
//!   first, then by killing running jobs smallest-first and, among equal
//!   sizes, the most recently started first.
//! - Web tier: releases surplus nodes at once and claims any shortfall.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::{JobId, Seconds};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PolicyError {
    #[error("cannot reclaim {demand} node(s): batch tier holds only {available}")]
    InfeasibleReclaim { demand: u32, available: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunningJobView {
    pub job_id: JobId,
    pub size: u32,
    /// Seconds the job has been running so far.
    pub elapsed: Seconds,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReclaimOrder {
    pub demanded: u32,
    /// Reallocation delay the reclaimed nodes will pay before the web tier sees them.
    pub deadline_hint: Seconds,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum PolicyDecision {
    GrantIdleToSt(u32),
    ReclaimFromSt(u32),
    GrantToWs(u32),
    ReleaseToProvisioner(u32),
    KillJobs(Vec<JobId>),
}

pub fn provision_on_idle(idle_count: u32) -> PolicyDecision {
    PolicyDecision::GrantIdleToSt(idle_count)
}

/// Splits a web-tier claim into an immediate grant from idle nodes and a
/// forced reclaim from the batch tier for the rest.
pub fn provision_on_ws_claim(claim: u32, idle_count: u32) -> Vec<PolicyDecision> {
    let grant = claim.min(idle_count);
    let reclaim = claim - grant;
    let mut out = Vec::with_capacity(2);
    if grant > 0 {
        out.push(PolicyDecision::GrantToWs(grant));
    }
    if reclaim > 0 {
        out.push(PolicyDecision::ReclaimFromSt(reclaim));
    }
    out
}

/// Victim order: ascending size, then ascending elapsed time, then job id.
pub fn kill_order(running: &[RunningJobView]) -> Vec<RunningJobView> {
    let mut out = running.to_vec();
    out.sort_by_key(|j| (j.size, j.elapsed, j.job_id));
    out
}

/// How the batch tier satisfies a forced reclaim.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReleasePlan {
    /// Jobs to kill, in kill order.
    pub victims: Vec<JobId>,
    /// Nodes handed to the provisioner; always the demanded amount.
    pub released: u32,
    /// Nodes freed by the last victim beyond the deficit; they stay with ST.
    pub surplus: u32,
}

impl ReleasePlan {
    pub fn decisions(&self) -> Vec<PolicyDecision> {
        let mut out = Vec::with_capacity(2);
        if !self.victims.is_empty() {
            out.push(PolicyDecision::KillJobs(self.victims.clone()));
        }
        out.push(PolicyDecision::ReleaseToProvisioner(self.released));
        out
    }
}

pub fn st_release_plan(
    demand: u32,
    st_free: u32,
    running: &[RunningJobView],
) -> Result<ReleasePlan, PolicyError> {
    let busy: u32 = running.iter().map(|j| j.size).sum();
    if demand > st_free + busy {
        return Err(PolicyError::InfeasibleReclaim {
            demand,
            available: st_free + busy,
        });
    }
    let mut victims = Vec::new();
    let mut available = st_free;
    for job in kill_order(running) {
        if available >= demand {
            break;
        }
        available += job.size;
        victims.push(job.job_id);
    }
    let surplus = if victims.is_empty() {
        0
    } else {
        available - demand
    };
    Ok(ReleasePlan {
        victims,
        released: demand,
        surplus,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WsAdjustment {
    Release(u32),
    Claim(u32),
    Hold,
}

pub fn ws_adjust(current_held: u32, new_demand: u32) -> WsAdjustment {
    use std::cmp::Ordering::*;
    match current_held.cmp(&new_demand) {
        Greater => WsAdjustment::Release(current_held - new_demand),
        Less => WsAdjustment::Claim(new_demand - current_held),
        Equal => WsAdjustment::Hold,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn view(job_id: JobId, size: u32, elapsed: Seconds) -> RunningJobView {
        RunningJobView {
            job_id,
            size,
            elapsed,
        }
    }

    #[test]
    fn idle_goes_to_st() {
        assert_eq!(provision_on_idle(10), PolicyDecision::GrantIdleToSt(10));
        assert_eq!(provision_on_idle(0), PolicyDecision::GrantIdleToSt(0));
    }

    #[test]
    fn ws_claim_split() {
        assert_eq!(
            provision_on_ws_claim(5, 8),
            vec![PolicyDecision::GrantToWs(5)]
        );
        assert_eq!(
            provision_on_ws_claim(5, 2),
            vec![
                PolicyDecision::GrantToWs(2),
                PolicyDecision::ReclaimFromSt(3)
            ]
        );
        assert_eq!(
            provision_on_ws_claim(3, 0),
            vec![PolicyDecision::ReclaimFromSt(3)]
        );
    }

    #[test]
    fn kill_order_size_then_elapsed() {
        let order = kill_order(&[view(1, 4, 100), view(2, 1, 500), view(3, 1, 50)]);
        let ids: Vec<_> = order.iter().map(|j| j.job_id).collect();
        assert_eq!(ids, vec![3, 2, 1]);
        assert!(kill_order(&[]).is_empty());
    }

    #[test]
    fn release_from_free_pool() {
        let plan = st_release_plan(2, 5, &[view(1, 3, 10)]).unwrap();
        assert!(plan.victims.is_empty());
        assert_eq!(plan.released, 2);
        assert_eq!(
            plan.decisions(),
            vec![PolicyDecision::ReleaseToProvisioner(2)]
        );
    }

    #[test]
    fn release_kills_in_order_and_keeps_surplus() {
        let plan = st_release_plan(3, 0, &[view(1, 2, 10), view(2, 2, 99)]).unwrap();
        assert_eq!(plan.victims, vec![1, 2]);
        assert_eq!(plan.released, 3);
        assert_eq!(plan.surplus, 1);
        assert_eq!(
            plan.decisions(),
            vec![
                PolicyDecision::KillJobs(vec![1, 2]),
                PolicyDecision::ReleaseToProvisioner(3)
            ]
        );
    }

    #[test]
    fn release_infeasible() {
        assert_eq!(
            st_release_plan(10, 1, &[view(1, 2, 0), view(2, 3, 0)]),
            Err(PolicyError::InfeasibleReclaim {
                demand: 10,
                available: 6
            })
        );
    }

    #[test]
    fn ws_adjust_cases() {
        assert_eq!(ws_adjust(10, 6), WsAdjustment::Release(4));
        assert_eq!(ws_adjust(6, 10), WsAdjustment::Claim(4));
        assert_eq!(ws_adjust(6, 6), WsAdjustment::Hold);
    }

    fn arb_running() -> impl Strategy<Value = Vec<RunningJobView>> {
        prop::collection::vec((1u32..8, 0u64..50), 0..20).prop_map(|v| {
            v.into_iter()
                .enumerate()
                .map(|(i, (s, e))| view(i as JobId, s, e))
                .collect()
        })
    }

    proptest! {
        #[test]
        fn kill_order_is_sorted_permutation(running in arb_running()) {
            let order = kill_order(&running);
            let mut a: Vec<_> = order.iter().map(|j| j.job_id).collect();
            let mut b: Vec<_> = running.iter().map(|j| j.job_id).collect();
            a.sort_unstable();
            b.sort_unstable();
            prop_assert_eq!(a, b);
            for w in order.windows(2) {
                prop_assert!((w[0].size, w[0].elapsed, w[0].job_id) < (w[1].size, w[1].elapsed, w[1].job_id));
            }
        }

        #[test]
        fn release_plan_is_minimal_prefix(running in arb_running(), free in 0u32..6, demand in 1u32..40) {
            match st_release_plan(demand, free, &running) {
                Ok(plan) => {
                    let order = kill_order(&running);
                    let k = plan.victims.len();
                    let prefix: Vec<_> = order[..k].iter().map(|j| j.job_id).collect();
                    prop_assert_eq!(&plan.victims, &prefix);
                    let freed: u32 = order[..k].iter().map(|j| j.size).sum();
                    prop_assert!(free + freed >= demand);
                    if k > 0 {
                        prop_assert!(free + freed - order[k - 1].size < demand);
                        prop_assert_eq!(plan.surplus, free + freed - demand);
                    } else {
                        prop_assert_eq!(plan.surplus, 0);
                    }
                }
                Err(PolicyError::InfeasibleReclaim { .. }) => {
                    let busy: u32 = running.iter().map(|j| j.size).sum();
                    prop_assert!(demand > free + busy);
                }
            }
        }
    }
}
