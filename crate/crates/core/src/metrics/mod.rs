//! Probes, trace files and the statistics computed from them.

pub mod csvio;
pub mod oracle;
pub mod probe;
pub mod stats;

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernel::SimTime;

pub use oracle::{analytic_delay_oracle, bdp_segments};
pub use probe::{CwndProbe, CwndSample, DelayProbe, DelaySample, PacketRecord, QueueProbe, QueueSample};
pub use stats::{summarize, DelayStats, Window};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("measurement window [{start}, {end}) is empty")]
    EmptyWindow { start: SimTime, end: SimTime },
    #[error("{path}: {detail}")]
    Schema { path: String, detail: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Traces of one TCP connection.
#[derive(Debug, Clone, Default)]
pub struct FlowTraces {
    /// Waits of this connection's packets at the uplink queue.
    pub uplink_delay: DelayProbe,
    pub cwnd: CwndProbe,
}

#[derive(Debug, Clone)]
pub struct QueueTraces {
    pub rate_bps: u64,
    pub capacity_pkts: u32,
    pub probe: QueueProbe,
}

/// Everything the probes collected in one run.
#[derive(Debug, Clone, Default)]
pub struct Traces {
    pub flows: BTreeMap<String, FlowTraces>,
    pub queues: BTreeMap<String, QueueTraces>,
    pub packets: BTreeMap<String, Vec<PacketRecord>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowTraceSummary {
    pub uplink_queuing_delay: DelayStats,
    pub mean_cwnd: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueueSummary {
    pub rate_bps: u64,
    pub capacity_pkts: u32,
    pub max_occupancy_pkts: u32,
    pub mean_occupancy_pkts: f64,
    /// Time-averaged wait a zero-length probe would see.
    pub mean_virtual_delay_s: f64,
    pub drops: u64,
    pub drops_in_window: u64,
}

/// The part of a run summary that is a pure function of the trace files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub flows: BTreeMap<String, FlowTraceSummary>,
    pub queues: BTreeMap<String, QueueSummary>,
}

pub fn summarize_queue(q: &QueueTraces, window: Window) -> QueueSummary {
    let samples = &q.probe.samples;
    let drops_before = samples
        .iter()
        .take_while(|s| s.time < window.start)
        .last()
        .map_or(0, |s| s.drops_cum);
    let drops_at_end = samples
        .iter()
        .take_while(|s| s.time < window.end)
        .last()
        .map_or(0, |s| s.drops_cum);
    QueueSummary {
        rate_bps: q.rate_bps,
        capacity_pkts: q.capacity_pkts,
        max_occupancy_pkts: samples.iter().map(|s| s.occupancy_pkts).max().unwrap_or(0),
        mean_occupancy_pkts: stats::mean_occupancy(samples, window),
        mean_virtual_delay_s: stats::mean_virtual_delay(samples, q.rate_bps, window),
        drops: samples.last().map_or(0, |s| s.drops_cum),
        drops_in_window: drops_at_end - drops_before,
    }
}

pub fn summarize_traces(traces: &Traces, window: Window) -> TraceSummary {
    TraceSummary {
        flows: traces
            .flows
            .iter()
            .map(|(name, f)| {
                (name.clone(), FlowTraceSummary {
                    uplink_queuing_delay: summarize(&f.uplink_delay.samples, window),
                    mean_cwnd: stats::mean_cwnd(&f.cwnd.samples, window),
                })
            })
            .collect(),
        queues: traces
            .queues
            .iter()
            .map(|(name, q)| (name.clone(), summarize_queue(q, window)))
            .collect(),
    }
}

impl Traces {
    /// Writes `cwnd_<flow>.csv`, `delay_<flow>.csv`, `queue_<name>.csv` and
    /// `packets_<app>.csv` into `dir`.
    pub fn write_csv(&self, dir: &Path) -> Result<(), MetricsError> {
        for (name, f) in &self.flows {
            csvio::write_cwnd(&dir.join(format!("cwnd_{name}.csv")), &f.cwnd.samples)?;
            csvio::write_delay(&dir.join(format!("delay_{name}.csv")), &f.uplink_delay.samples)?;
        }
        for (name, q) in &self.queues {
            csvio::write_queue(&dir.join(format!("queue_{name}.csv")), &q.probe.samples)?;
        }
        for (name, p) in &self.packets {
            csvio::write_packets(&dir.join(format!("packets_{name}.csv")), p)?;
        }
        Ok(())
    }

    /// Reloads the traces named in `flows` and `queues` (with their link
    /// rate and capacity) from a result directory.
    pub fn read_csv(
        dir: &Path,
        flows: &[String],
        queues: &[(String, u64, u32)],
    ) -> Result<Traces, MetricsError> {
        let mut t = Traces::default();
        for name in flows {
            t.flows.insert(name.clone(), FlowTraces {
                uplink_delay: DelayProbe {
                    samples: csvio::read_delay(&dir.join(format!("delay_{name}.csv")))?,
                },
                cwnd: CwndProbe {
                    samples: csvio::read_cwnd(&dir.join(format!("cwnd_{name}.csv")))?,
                },
            });
        }
        for (name, rate_bps, capacity_pkts) in queues {
            t.queues.insert(name.clone(), QueueTraces {
                rate_bps: *rate_bps,
                capacity_pkts: *capacity_pkts,
                probe: QueueProbe {
                    samples: csvio::read_queue(&dir.join(format!("queue_{name}.csv")))?,
                },
            });
        }
        Ok(t)
    }
}
