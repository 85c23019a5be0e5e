//! Smoothed RTT and retransmission timeout.
//!
//! Standard estimator: gains 1/8 and 1/4, `rto = srtt + 4 * rttvar`, floored
//! at the configured minimum and multiplied by an exponential backoff that
//! doubles on each timeout (capped) and resets on the next valid sample.

use crate::kernel::SimTime;

pub const MAX_BACKOFF: u32 = 64;

#[derive(Debug, Clone)]
pub struct RttEstimator {
    srtt: Option<u64>,
    rttvar: u64,
    min_rto: u64,
    initial_rto: u64,
    backoff: u32,
    latest: Option<SimTime>,
}

impl RttEstimator {
    pub fn new(min_rto: SimTime, initial_rto: SimTime) -> Self {
        RttEstimator {
            srtt: None,
            rttvar: 0,
            min_rto: min_rto.as_nanos(),
            initial_rto: initial_rto.as_nanos(),
            backoff: 1,
            latest: None,
        }
    }

    pub fn on_sample(&mut self, rtt: SimTime) {
        let r = rtt.as_nanos();
        match self.srtt {
            None => {
                self.srtt = Some(r);
                self.rttvar = r / 2;
            }
            Some(srtt) => {
                self.rttvar = (3 * self.rttvar + srtt.abs_diff(r)) / 4;
                self.srtt = Some((7 * srtt + r) / 8);
            }
        }
        self.latest = Some(rtt);
        self.backoff = 1;
    }

    /// Timeout before backoff is applied.
    pub fn base_rto(&self) -> SimTime {
        let rto = match self.srtt {
            None => self.initial_rto,
            Some(srtt) => srtt + 4 * self.rttvar,
        };
        SimTime::from_nanos(rto.max(self.min_rto))
    }

    pub fn rto(&self) -> SimTime {
        SimTime::from_nanos(self.base_rto().as_nanos() * u64::from(self.backoff))
    }

    pub fn back_off(&mut self) {
        self.backoff = (self.backoff * 2).min(MAX_BACKOFF);
    }

    pub fn backoff(&self) -> u32 {
        self.backoff
    }

    pub fn srtt(&self) -> Option<SimTime> {
        self.srtt.map(SimTime::from_nanos)
    }

    pub fn rttvar(&self) -> SimTime {
        SimTime::from_nanos(self.rttvar)
    }

    pub fn latest(&self) -> Option<SimTime> {
        self.latest
    }
}
