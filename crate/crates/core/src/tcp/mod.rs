//! TCP endpoints: a congestion-controlled sender (SACK, New Reno or Vegas)
//! and an ACK-every-segment receiver.

pub mod receiver;
pub mod rtt;
pub mod sender;
pub mod vegas;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::kernel::SimTime;
use crate::net::packet::MSS;

pub use receiver::{Received, TcpReceiver};
pub use rtt::RttEstimator;
pub use sender::{Mode, SendSeg, Segment, SenderStats, TcpSender};
pub use vegas::{VegasParams, VegasState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "sack")]
    Sack,
    #[serde(rename = "newreno")]
    NewReno,
    #[serde(rename = "vegas")]
    Vegas,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Sack, Variant::NewReno, Variant::Vegas];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Sack => "sack",
            Variant::NewReno => "newreno",
            Variant::Vegas => "vegas",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "sack" => Ok(Variant::Sack),
            "newreno" | "new_reno" | "new-reno" => Ok(Variant::NewReno),
            "vegas" => Ok(Variant::Vegas),
            other => Err(format!("unknown TCP variant `{other}` (expected sack, newreno or vegas)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TcpConfig {
    pub variant: Variant,
    pub mss: u32,
    pub initial_cwnd: f64,
    /// Receiver-advertised window, in segments.
    pub adv_window: u32,
    pub min_rto: SimTime,
    pub initial_rto: SimTime,
    pub vegas: VegasParams,
}

impl Default for TcpConfig {
    fn default() -> Self {
        TcpConfig {
            variant: Variant::Sack,
            mss: MSS,
            initial_cwnd: 2.0,
            adv_window: 64,
            min_rto: SimTime::from_millis(200),
            initial_rto: SimTime::from_secs(1),
            vegas: VegasParams::default(),
        }
    }
}
