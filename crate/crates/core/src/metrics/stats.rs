//! Summary statistics over a half-open measurement window `[start, end)`.

use serde::{Deserialize, Serialize};

use crate::kernel::SimTime;
use crate::metrics::probe::{CwndSample, DelaySample, QueueSample};
use crate::metrics::MetricsError;
use crate::net::serialization_time;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub start: SimTime,
    pub end: SimTime,
}

impl Window {
    pub fn new(start: SimTime, end: SimTime) -> Result<Self, MetricsError> {
        if start >= end {
            return Err(MetricsError::EmptyWindow { start, end });
        }
        Ok(Window { start, end })
    }

    pub fn contains(&self, t: SimTime) -> bool {
        self.start <= t && t < self.end
    }

    pub fn len(&self) -> SimTime {
        self.end - self.start
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum DelayStats {
    Ok {
        samples: u64,
        mean_s: f64,
        median_s: f64,
        p95_s: f64,
        max_s: f64,
    },
    NoSamples,
}

impl DelayStats {
    pub fn mean_s(&self) -> Option<f64> {
        match self {
            DelayStats::Ok { mean_s, .. } => Some(*mean_s),
            DelayStats::NoSamples => None,
        }
    }

    pub fn samples(&self) -> u64 {
        match self {
            DelayStats::Ok { samples, .. } => *samples,
            DelayStats::NoSamples => 0,
        }
    }
}

/// Statistics of the samples whose enqueue time falls in the window.
pub fn summarize(samples: &[DelaySample], window: Window) -> DelayStats {
    let mut ns: Vec<u64> = samples
        .iter()
        .filter(|s| window.contains(s.t_enqueued))
        .map(|s| s.queuing_delay.as_nanos())
        .collect();
    if ns.is_empty() {
        return DelayStats::NoSamples;
    }
    ns.sort_unstable();
    let n = ns.len();
    let sum: u128 = ns.iter().map(|&x| u128::from(x)).sum();
    let mean = sum as f64 / n as f64 / 1e9;
    let median = if n % 2 == 1 {
        ns[n / 2] as f64 / 1e9
    } else {
        (ns[n / 2 - 1] as f64 + ns[n / 2] as f64) / 2.0 / 1e9
    };
    // Nearest rank.
    let rank = ((0.95 * n as f64).ceil() as usize).clamp(1, n);
    DelayStats::Ok {
        samples: n as u64,
        mean_s: mean,
        median_s: median,
        p95_s: ns[rank - 1] as f64 / 1e9,
        max_s: ns[n - 1] as f64 / 1e9,
    }
}

/// Time average over the window of a right-continuous step function given
/// by `(time, value)` change points, `initial` before the first one.
pub fn time_weighted_mean(points: impl IntoIterator<Item = (SimTime, f64)>, initial: f64, window: Window) -> f64 {
    let mut acc = 0.0;
    let mut value = initial;
    let mut at = window.start;
    for (t, v) in points {
        if t >= window.end {
            break;
        }
        if t > at {
            acc += value * (t - at).as_nanos() as f64;
            at = t;
        }
        value = v;
    }
    acc += value * (window.end - at).as_nanos() as f64;
    acc / window.len().as_nanos() as f64
}

pub fn mean_cwnd(samples: &[CwndSample], window: Window) -> Option<f64> {
    let first = samples.first()?;
    Some(time_weighted_mean(
        samples.iter().map(|s| (s.time, s.cwnd)),
        first.cwnd,
        window,
    ))
}

pub fn mean_occupancy(samples: &[QueueSample], window: Window) -> f64 {
    time_weighted_mean(
        samples.iter().map(|s| (s.time, f64::from(s.occupancy_pkts))),
        0.0,
        window,
    )
}

/// Time average of the unfinished work at a FIFO served at `rate_bps`: the
/// wait a zero-length probe arriving at a uniformly random instant of the
/// window would see.
///
/// The work is rebuilt from the occupancy trace alone. Each byte increase is
/// an accepted arrival and adds its serialization time; in between, the
/// work drains at one second per second until the link idles.
pub fn mean_virtual_delay(samples: &[QueueSample], rate_bps: u64, window: Window) -> f64 {
    // Twice the integral, in ns^2, so ramp halves stay integral.
    let mut twice_area: u128 = 0;
    let mut work: u64 = 0;
    let mut at = SimTime::ZERO;
    let mut prev_bytes = 0u64;

    let add_span = |from: SimTime, to: SimTime, work_at_from: u64, acc: &mut u128| {
        let lo = from.max(window.start);
        let hi = to.min(window.end);
        if lo >= hi {
            return;
        }
        let w0 = work_at_from.saturating_sub((lo - from).as_nanos());
        let span = (hi - lo).as_nanos();
        let busy = w0.min(span);
        let w1 = w0 - busy;
        // Trapezoid over the draining part; the idle remainder adds nothing.
        *acc += u128::from(w0 + w1) * u128::from(busy);
    };

    for s in samples {
        if s.time > at {
            add_span(at, s.time, work, &mut twice_area);
            work = work.saturating_sub((s.time - at).as_nanos());
            at = s.time;
        }
        if s.occupancy_bytes > prev_bytes {
            let arrived = (s.occupancy_bytes - prev_bytes) as u32;
            work += serialization_time(arrived, rate_bps).as_nanos();
        }
        prev_bytes = s.occupancy_bytes;
    }
    if at < window.end {
        add_span(at, window.end, work, &mut twice_area);
    }
    twice_area as f64 / 2.0 / window.len().as_nanos() as f64 / 1e9
}
