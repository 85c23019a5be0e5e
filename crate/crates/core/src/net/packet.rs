use serde::{Deserialize, Serialize};

use crate::kernel::SimTime;

/// IPv4 + TCP header bytes, no options.
pub const HEADER_BYTES: u32 = 40;
pub const MSS: u32 = 1460;
pub const MAX_WIRE_BYTES: u32 = MSS + HEADER_BYTES;
pub const MAX_SACK_BLOCKS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub u8);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FlowId(pub u16);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Uplink,
    Downlink,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Uplink => "uplink",
            Direction::Downlink => "downlink",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TcpFlags {
    pub psh: bool,
    pub ack: bool,
}

/// Half-open byte range `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SackBlock {
    pub start: u64,
    pub end: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TcpHeader {
    pub seq: u64,
    pub ack: u64,
    pub flags: TcpFlags,
    pub sack: Vec<SackBlock>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Packet {
    pub id: u64,
    pub flow: FlowId,
    pub direction: Direction,
    pub src: NodeId,
    pub dst: NodeId,
    pub header: TcpHeader,
    pub payload_bytes: u32,
    pub wire_bytes: u32,
    pub t_created: SimTime,
    pub t_enqueued: SimTime,
}

impl Packet {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        id: u64,
        flow: FlowId,
        direction: Direction,
        src: NodeId,
        dst: NodeId,
        header: TcpHeader,
        payload_bytes: u32,
        now: SimTime,
    ) -> Self {
        debug_assert!(payload_bytes <= MSS);
        Packet {
            id,
            flow,
            direction,
            src,
            dst,
            header,
            payload_bytes,
            wire_bytes: payload_bytes + HEADER_BYTES,
            t_created: now,
            t_enqueued: now,
        }
    }

    pub fn is_data(&self) -> bool {
        self.payload_bytes > 0
    }

    pub fn seq_end(&self) -> u64 {
        self.header.seq + u64::from(self.payload_bytes)
    }
}
