//! How the batch tier answers a forced reclaim: free nodes first, then running
//! jobs killed smallest-first, youngest-first.

use consolidsim::policies::{kill_order, provision_on_ws_claim, st_release_plan, RunningJobView};

fn main() {
    let running = [
        RunningJobView {
            job_id: 11,
            size: 8,
            elapsed: 3_600,
        },
        RunningJobView {
            job_id: 12,
            size: 2,
            elapsed: 900,
        },
        RunningJobView {
            job_id: 13,
            size: 2,
            elapsed: 60,
        },
        RunningJobView {
            job_id: 14,
            size: 4,
            elapsed: 30,
        },
    ];
    let order: Vec<_> = kill_order(&running).iter().map(|j| j.job_id).collect();
    println!("kill order: {order:?}");

    let idle = 1;
    for claim in [1, 3, 6, 9] {
        let split = provision_on_ws_claim(claim, idle);
        let reclaim = claim.saturating_sub(idle);
        let plan = st_release_plan(reclaim, 1, &running).expect("enough batch nodes");
        println!(
            "web tier claims {claim}: {split:?}; batch kills {:?}, hands over {}, keeps {} surplus",
            plan.victims, plan.released, plan.surplus
        );
    }
}
