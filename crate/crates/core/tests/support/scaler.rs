//! Scalar-loop reference for the threshold autoscaler.

use consolidsim::autoscaler::{AutoscalerConfig, TIE_EPSILON};
use consolidsim::traces::RequestSeries;

/// Instance count change points, starting with `(0, min_instances)`.
pub fn derive(requests: &RequestSeries, cfg: &AutoscalerConfig) -> Vec<(u64, u32)> {
    let need = cfg.window.div_ceil(cfg.tick) as usize;
    let mut n = cfg.min_instances;
    let mut history: Vec<f64> = Vec::new();
    let mut out = vec![(0, n)];
    let mut t = cfg.tick;
    while t < requests.duration() {
        let mut rate = 0.0;
        for &(ts, r) in requests.samples() {
            if ts <= t - cfg.tick {
                rate = r;
            }
        }
        let mut u = rate / (n as f64 * cfg.capacity_per_instance);
        if u > 1.0 {
            u = 1.0;
        }
        history.push(u);
        if history.len() >= need {
            let recent = &history[history.len() - need..];
            let mut sum = 0.0;
            for x in recent {
                sum += x;
            }
            let avg = sum / need as f64;
            let down = cfg.upscale_threshold * (n as f64 - 1.0) / n as f64;
            let before = n;
            if avg > cfg.upscale_threshold + TIE_EPSILON {
                n += 1;
            } else if n > cfg.min_instances && avg < down - TIE_EPSILON {
                n -= 1;
            }
            if n != before {
                history.clear();
                out.push((t, n));
            }
        }
        t += cfg.tick;
    }
    out
}
