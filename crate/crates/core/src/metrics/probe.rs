//! Raw time series collected during a run.

use crate::kernel::SimTime;
use crate::net::{Direction, Packet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DelaySample {
    pub t_enqueued: SimTime,
    /// Wait from enqueue to the start of the packet's own transmission.
    pub queuing_delay: SimTime,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CwndSample {
    pub time: SimTime,
    pub cwnd: f64,
    pub ssthresh: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QueueSample {
    pub time: SimTime,
    pub occupancy_pkts: u32,
    pub occupancy_bytes: u64,
    pub drops_cum: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PacketRecord {
    pub time: SimTime,
    pub wire_bytes: u32,
    pub direction: Direction,
}

/// Queuing-delay samples of one flow at one queue.
#[derive(Debug, Clone, Default)]
pub struct DelayProbe {
    pub samples: Vec<DelaySample>,
}

impl DelayProbe {
    /// Records the packet's wait, given the instant its transmission starts.
    pub fn record_delay(&mut self, packet: &Packet, t_start_tx: SimTime) -> DelaySample {
        let sample = DelaySample {
            t_enqueued: packet.t_enqueued,
            queuing_delay: t_start_tx - packet.t_enqueued,
        };
        self.samples.push(sample);
        sample
    }
}

/// Window trace, appended only when `cwnd` or `ssthresh` change.
#[derive(Debug, Clone, Default)]
pub struct CwndProbe {
    pub samples: Vec<CwndSample>,
}

impl CwndProbe {
    pub fn observe(&mut self, time: SimTime, cwnd: f64, ssthresh: f64) {
        if let Some(last) = self.samples.last() {
            if last.cwnd == cwnd && last.ssthresh == ssthresh {
                return;
            }
        }
        self.samples.push(CwndSample { time, cwnd, ssthresh });
    }
}

/// Occupancy trace, one row per change (enqueue, dequeue or drop).
#[derive(Debug, Clone, Default)]
pub struct QueueProbe {
    pub samples: Vec<QueueSample>,
}

impl QueueProbe {
    pub fn observe(&mut self, time: SimTime, occupancy_pkts: u32, occupancy_bytes: u64, drops_cum: u64) {
        self.samples.push(QueueSample {
            time,
            occupancy_pkts,
            occupancy_bytes,
            drops_cum,
        });
    }
}
