//! CSV encodings of the probe traces. Times use nine fractional digits so
//! they round-trip to the nanosecond.

use std::fs::File;
use std::path::Path;

use crate::kernel::SimTime;
use crate::metrics::probe::{CwndSample, DelaySample, PacketRecord, QueueSample};
use crate::metrics::MetricsError;
use crate::net::Direction;

pub const CWND_HEADER: [&str; 3] = ["time_s", "cwnd_segments", "ssthresh_segments"];
pub const DELAY_HEADER: [&str; 2] = ["enqueue_time_s", "delay_s"];
pub const QUEUE_HEADER: [&str; 4] = ["time_s", "occupancy_pkts", "occupancy_bytes", "drops_cum"];
pub const PACKET_HEADER: [&str; 3] = ["time_s", "wire_bytes", "direction"];

fn writer(path: &Path, header: &[&str]) -> Result<csv::Writer<File>, MetricsError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    Ok(w)
}

pub fn write_cwnd(path: &Path, samples: &[CwndSample]) -> Result<(), MetricsError> {
    let mut w = writer(path, &CWND_HEADER)?;
    for s in samples {
        w.write_record([s.time.to_fixed9(), s.cwnd.to_string(), s.ssthresh.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_delay(path: &Path, samples: &[DelaySample]) -> Result<(), MetricsError> {
    let mut w = writer(path, &DELAY_HEADER)?;
    for s in samples {
        w.write_record([s.t_enqueued.to_fixed9(), s.queuing_delay.to_fixed9()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_queue(path: &Path, samples: &[QueueSample]) -> Result<(), MetricsError> {
    let mut w = writer(path, &QUEUE_HEADER)?;
    for s in samples {
        w.write_record([
            s.time.to_fixed9(),
            s.occupancy_pkts.to_string(),
            s.occupancy_bytes.to_string(),
            s.drops_cum.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_packets(path: &Path, records: &[PacketRecord]) -> Result<(), MetricsError> {
    let mut w = writer(path, &PACKET_HEADER)?;
    for r in records {
        w.write_record([
            r.time.to_fixed9(),
            r.wire_bytes.to_string(),
            r.direction.as_str().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn rows(path: &Path, header: &[&str]) -> Result<Vec<csv::StringRecord>, MetricsError> {
    let mut r = csv::Reader::from_path(path)?;
    let got: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if got != header {
        return Err(MetricsError::Schema {
            path: path.display().to_string(),
            detail: format!("expected columns {header:?}, found {got:?}"),
        });
    }
    r.records().map(|rec| rec.map_err(MetricsError::from)).collect()
}

fn field<T: std::str::FromStr>(path: &Path, rec: &csv::StringRecord, i: usize, col: &str) -> Result<T, MetricsError> {
    rec.get(i)
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| MetricsError::Schema {
            path: path.display().to_string(),
            detail: format!("bad value in column `{col}`: {:?}", rec.get(i)),
        })
}

fn time(path: &Path, rec: &csv::StringRecord, i: usize, col: &str) -> Result<SimTime, MetricsError> {
    rec.get(i)
        .and_then(SimTime::parse_fixed9)
        .ok_or_else(|| MetricsError::Schema {
            path: path.display().to_string(),
            detail: format!("bad time in column `{col}`: {:?}", rec.get(i)),
        })
}

pub fn read_cwnd(path: &Path) -> Result<Vec<CwndSample>, MetricsError> {
    rows(path, &CWND_HEADER)?
        .iter()
        .map(|r| {
            Ok(CwndSample {
                time: time(path, r, 0, "time_s")?,
                cwnd: field(path, r, 1, "cwnd_segments")?,
                ssthresh: field(path, r, 2, "ssthresh_segments")?,
            })
        })
        .collect()
}

pub fn read_delay(path: &Path) -> Result<Vec<DelaySample>, MetricsError> {
    rows(path, &DELAY_HEADER)?
        .iter()
        .map(|r| {
            Ok(DelaySample {
                t_enqueued: time(path, r, 0, "enqueue_time_s")?,
                queuing_delay: time(path, r, 1, "delay_s")?,
            })
        })
        .collect()
}

pub fn read_queue(path: &Path) -> Result<Vec<QueueSample>, MetricsError> {
    rows(path, &QUEUE_HEADER)?
        .iter()
        .map(|r| {
            Ok(QueueSample {
                time: time(path, r, 0, "time_s")?,
                occupancy_pkts: field(path, r, 1, "occupancy_pkts")?,
                occupancy_bytes: field(path, r, 2, "occupancy_bytes")?,
                drops_cum: field(path, r, 3, "drops_cum")?,
            })
        })
        .collect()
}

pub fn read_packets(path: &Path) -> Result<Vec<PacketRecord>, MetricsError> {
    rows(path, &PACKET_HEADER)?
        .iter()
        .map(|r| {
            let direction = match r.get(2) {
                Some("uplink") => Direction::Uplink,
                Some("downlink") => Direction::Downlink,
                other => {
                    return Err(MetricsError::Schema {
                        path: path.display().to_string(),
                        detail: format!("bad direction {other:?}"),
                    })
                }
            };
            Ok(PacketRecord {
                time: time(path, r, 0, "time_s")?,
                wire_bytes: field(path, r, 1, "wire_bytes")?,
                direction,
            })
        })
        .collect()
}
