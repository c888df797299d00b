//! Threshold autoscaler for the web-service tier.
//!
//! Utilization is modelled analytically as `rate / (n * capacity)`, capped
//! at 1. Every tick the scaler records one utilization sample. Once it has a full
//! window of samples it adds one instance if the window average exceeds the
//! upscale threshold, or removes one if the average is below
//! `threshold * (n - 1) / n`. The window is cleared after every change.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::traces::{DemandSeries, RequestSeries, TraceError};
use crate::Seconds;

/// Window averages within this distance of a threshold count as ties and do
/// not trigger a change. Summing equal samples in floating point drifts by a
/// few ulps; without it a steady 80% load could scale up.
pub const TIE_EPSILON: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum AutoscalerError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("step at t={now} is not after the previous step at t={last}")]
    NonMonotoneTime { now: Seconds, last: Seconds },
    #[error("no capacity yields a peak of exactly {target} instances")]
    Uncalibratable { target: u32 },
    #[error(transparent)]
    Trace(#[from] TraceError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AutoscalerConfig {
    /// Requests per second one instance serves at 100% CPU.
    pub capacity_per_instance: f64,
    pub upscale_threshold: f64,
    /// Length of the averaging window.
    pub window: Seconds,
    /// Sampling and decision interval.
    pub tick: Seconds,
    pub min_instances: u32,
}

impl AutoscalerConfig {
    /// 80% threshold over a 20 s window, sampled every second, floor of one instance.
    pub fn new(capacity_per_instance: f64) -> Self {
        Self {
            capacity_per_instance,
            upscale_threshold: 0.80,
            window: 20,
            tick: 1,
            min_instances: 1,
        }
    }

    pub fn validate(&self) -> Result<(), AutoscalerError> {
        let bad = |m: String| Err(AutoscalerError::InvalidArgument(m));
        if !(self.capacity_per_instance.is_finite() && self.capacity_per_instance > 0.0) {
            return bad(format!(
                "capacity_per_instance must be positive, got {}",
                self.capacity_per_instance
            ));
        }
        if !(self.upscale_threshold > 0.0 && self.upscale_threshold < 1.0) {
            return bad(format!(
                "upscale_threshold must lie in (0, 1), got {}",
                self.upscale_threshold
            ));
        }
        if self.window == 0 || self.tick == 0 {
            return bad("window and tick must be positive".into());
        }
        if self.min_instances == 0 {
            return bad("min_instances must be at least 1".into());
        }
        Ok(())
    }
}

/// CPU utilization of `n` instances serving `rate` requests per second.
pub fn utilization(rate: f64, n: u32, cfg: &AutoscalerConfig) -> Result<f64, AutoscalerError> {
    if n == 0 {
        return Err(AutoscalerError::InvalidArgument(
            "instance count must be at least 1".into(),
        ));
    }
    if !(rate.is_finite() && rate >= 0.0) {
        return Err(AutoscalerError::InvalidArgument(format!(
            "rate must be a finite non-negative number, got {rate}"
        )));
    }
    Ok((rate / (f64::from(n) * cfg.capacity_per_instance)).min(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScaleAction {
    Up,
    Down,
    Hold,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalerState {
    n: u32,
    window: VecDeque<(Seconds, f64)>,
    last: Option<Seconds>,
}

impl ScalerState {
    pub fn new(cfg: &AutoscalerConfig) -> Self {
        Self::with_instances(cfg.min_instances)
    }

    pub fn with_instances(n: u32) -> Self {
        Self {
            n,
            window: VecDeque::new(),
            last: None,
        }
    }

    pub fn instances(&self) -> u32 {
        self.n
    }

    /// Samples currently in the averaging window.
    pub fn window(&self) -> impl Iterator<Item = &(Seconds, f64)> {
        self.window.iter()
    }

    /// Records the utilization at `now` and applies at most one scaling action.
    pub fn step(
        &mut self,
        now: Seconds,
        rate: f64,
        cfg: &AutoscalerConfig,
    ) -> Result<ScaleAction, AutoscalerError> {
        if let Some(last) = self.last {
            if now <= last {
                return Err(AutoscalerError::NonMonotoneTime { now, last });
            }
        }
        let util = utilization(rate, self.n, cfg)?;
        self.last = Some(now);
        self.window.push_back((now, util));
        while self
            .window
            .front()
            .is_some_and(|&(t, _)| t + cfg.window <= now)
        {
            self.window.pop_front();
        }

        // A sample at t stands for the interval (t - tick, t].
        let full = self
            .window
            .front()
            .is_some_and(|&(t, _)| t + cfg.window <= now + cfg.tick);
        if !full {
            return Ok(ScaleAction::Hold);
        }
        let avg = self.window.iter().map(|&(_, u)| u).sum::<f64>() / self.window.len() as f64;
        let n = f64::from(self.n);
        let action = if avg > cfg.upscale_threshold + TIE_EPSILON {
            self.n += 1;
            ScaleAction::Up
        } else if self.n > cfg.min_instances
            && avg < cfg.upscale_threshold * (n - 1.0) / n - TIE_EPSILON
        {
            self.n -= 1;
            ScaleAction::Down
        } else {
            ScaleAction::Hold
        };
        if action != ScaleAction::Hold {
            self.window.clear();
        }
        Ok(action)
    }
}

/// Runs the autoscaler over a request series and records the instance count
/// every time it changes. The rate sampled at tick `t` is the rate in effect
/// at `t - tick`.
pub fn derive_demand(
    requests: &RequestSeries,
    cfg: &AutoscalerConfig,
) -> Result<DemandSeries, AutoscalerError> {
    cfg.validate()?;
    let mut state = ScalerState::new(cfg);
    let mut samples = vec![(0, state.instances())];
    let mut t = cfg.tick;
    while t < requests.duration() {
        let rate = requests.rate_at(t - cfg.tick);
        if state.step(t, rate, cfg)? != ScaleAction::Hold {
            samples.push((t, state.instances()));
        }
        t += cfg.tick;
    }
    Ok(DemandSeries::new(samples, requests.duration())?)
}

/// Finds a per-instance capacity for which the derived demand peaks at exactly
/// `target_peak` instances, by bisection on capacity.
pub fn calibrate_capacity(
    requests: &RequestSeries,
    cfg: &AutoscalerConfig,
    target_peak: u32,
) -> Result<f64, AutoscalerError> {
    let mut probe = *cfg;
    probe.capacity_per_instance = 1.0;
    probe.validate()?;
    if target_peak < cfg.min_instances {
        return Err(AutoscalerError::Uncalibratable {
            target: target_peak,
        });
    }
    let peak_rate = requests.peak_rate();
    let mut peak_at = |capacity: f64| -> Result<u32, AutoscalerError> {
        probe.capacity_per_instance = capacity;
        Ok(derive_demand(requests, &probe)?.peak())
    };

    // At this capacity min_instances never exceed the threshold.
    let mut hi =
        (peak_rate / (cfg.upscale_threshold * f64::from(cfg.min_instances))).max(1e-9) * 2.0;
    if peak_at(hi)? == target_peak {
        return Ok(hi);
    }
    let mut lo = hi;
    loop {
        lo /= 2.0;
        let p = peak_at(lo)?;
        if p == target_peak {
            return Ok(lo);
        }
        if p > target_peak {
            break;
        }
        if lo < 1e-12 {
            return Err(AutoscalerError::Uncalibratable {
                target: target_peak,
            });
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match peak_at(mid)?.cmp(&target_peak) {
            std::cmp::Ordering::Equal => return Ok(mid),
            std::cmp::Ordering::Greater => lo = mid,
            std::cmp::Ordering::Less => hi = mid,
        }
    }
    Err(AutoscalerError::Uncalibratable {
        target: target_peak,
    })
}
