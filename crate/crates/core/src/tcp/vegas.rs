//! Delay-based window control applied once per RTT epoch.
//!
//! `diff = (cwnd / base_rtt - cwnd / rtt) * base_rtt` is the number of this
//! flow's segments estimated to sit in the bottleneck queue. The window grows
//! by one segment when `diff < alpha`, shrinks by one when `diff > beta` and
//! otherwise holds. During slow start the window doubles every other epoch
//! and slow start ends as soon as `diff > gamma`.

use serde::{Deserialize, Serialize};

use crate::kernel::SimTime;

pub const MIN_VEGAS_CWND: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VegasParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl Default for VegasParams {
    fn default() -> Self {
        VegasParams {
            alpha: 1.0,
            beta: 3.0,
            gamma: 1.0,
        }
    }
}

/// Backlog estimate in segments.
pub fn backlog_estimate(cwnd: f64, base_rtt: SimTime, rtt: SimTime) -> f64 {
    let base = base_rtt.as_secs_f64();
    let rtt = rtt.as_secs_f64();
    (cwnd / base - cwnd / rtt) * base
}

#[derive(Debug, Clone)]
pub struct VegasState {
    pub params: VegasParams,
    pub base_rtt: Option<SimTime>,
    pub slow_start: bool,
    /// Slow start doubles on epochs where this is set, then flips it.
    pub grow_next: bool,
    /// The epoch ends once this sequence number is cumulatively acked.
    pub epoch_end_seq: Option<u64>,
    pub epoch_min_rtt: Option<SimTime>,
}

impl VegasState {
    pub fn new(params: VegasParams) -> Self {
        VegasState {
            params,
            base_rtt: None,
            slow_start: true,
            grow_next: true,
            epoch_end_seq: None,
            epoch_min_rtt: None,
        }
    }

    /// Starts in congestion avoidance with a known base RTT.
    pub fn in_congestion_avoidance(params: VegasParams, base_rtt: SimTime) -> Self {
        VegasState {
            slow_start: false,
            base_rtt: Some(base_rtt),
            ..Self::new(params)
        }
    }

    pub fn on_rtt_sample(&mut self, rtt: SimTime) {
        self.epoch_min_rtt = Some(self.epoch_min_rtt.map_or(rtt, |m| m.min(rtt)));
        self.base_rtt = Some(self.base_rtt.map_or(rtt, |b| b.min(rtt)));
    }

    /// Forgets the current epoch after a timeout. The base RTT is kept.
    pub fn reset_epoch(&mut self) {
        self.epoch_end_seq = None;
        self.epoch_min_rtt = None;
        self.slow_start = true;
        self.grow_next = true;
    }

    /// Applies one epoch's decision and returns the new window.
    pub fn on_epoch(&mut self, cwnd: f64, rtt: SimTime) -> f64 {
        let base = match self.base_rtt {
            Some(b) if b <= rtt => b,
            _ => {
                self.base_rtt = Some(rtt);
                rtt
            }
        };
        let diff = backlog_estimate(cwnd, base, rtt);
        let p = self.params;
        let next = if self.slow_start {
            if diff > p.gamma {
                self.slow_start = false;
                let target = (cwnd * base.as_secs_f64() / rtt.as_secs_f64()).floor() + 1.0;
                cwnd.min(target)
            } else if self.grow_next {
                self.grow_next = false;
                cwnd * 2.0
            } else {
                self.grow_next = true;
                cwnd
            }
        } else if diff < p.alpha {
            cwnd + 1.0
        } else if diff > p.beta {
            cwnd - 1.0
        } else {
            cwnd
        };
        next.max(MIN_VEGAS_CWND)
    }
}
