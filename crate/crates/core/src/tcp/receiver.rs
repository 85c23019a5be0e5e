use std::ops::Range;

use crate::net::packet::{SackBlock, TcpFlags, TcpHeader, MAX_SACK_BLOCKS};

#[derive(Debug, Clone)]
struct OooBlock {
    start: u64,
    end: u64,
    touched: u64,
}

/// What the receiver hands back for one data segment.
#[derive(Debug, Clone, PartialEq)]
pub struct Received {
    pub ack: TcpHeader,
    /// Bytes newly delivered to the application, in order.
    pub delivered: Option<Range<u64>>,
    pub duplicate: bool,
}

/// Cumulative-ACK receiver that acknowledges every data segment at once and
/// optionally reports out-of-order data as SACK blocks.
#[derive(Debug, Clone)]
pub struct TcpReceiver {
    rcv_nxt: u64,
    ooo: Vec<OooBlock>,
    sack_enabled: bool,
    delivered: u64,
    clock: u64,
}

impl TcpReceiver {
    pub fn new(sack_enabled: bool) -> Self {
        TcpReceiver {
            rcv_nxt: 0,
            ooo: Vec::new(),
            sack_enabled,
            delivered: 0,
            clock: 0,
        }
    }

    pub fn rcv_nxt(&self) -> u64 {
        self.rcv_nxt
    }

    pub fn delivered(&self) -> u64 {
        self.delivered
    }

    /// Out-of-order ranges held above `rcv_nxt`, sorted by start.
    pub fn out_of_order(&self) -> Vec<Range<u64>> {
        self.ooo.iter().map(|b| b.start..b.end).collect()
    }

    pub fn on_data(&mut self, seq: u64, len: u32) -> Received {
        let end = seq + u64::from(len);
        self.clock += 1;
        let mut delivered = None;
        let duplicate = end <= self.rcv_nxt || self.is_held(seq, end);
        if !duplicate {
            if seq <= self.rcv_nxt {
                let from = self.rcv_nxt;
                self.rcv_nxt = end;
                // Pull in any held blocks that are now contiguous.
                self.ooo.retain(|b| {
                    if b.start <= self.rcv_nxt {
                        self.rcv_nxt = self.rcv_nxt.max(b.end);
                        false
                    } else {
                        true
                    }
                });
                self.delivered += self.rcv_nxt - from;
                delivered = Some(from..self.rcv_nxt);
            } else {
                self.hold(seq, end);
            }
        }
        Received {
            ack: self.ack_header(),
            delivered,
            duplicate,
        }
    }

    fn is_held(&self, seq: u64, end: u64) -> bool {
        self.ooo.iter().any(|b| b.start <= seq && end <= b.end)
    }

    fn hold(&mut self, seq: u64, end: u64) {
        let mut start = seq;
        let mut stop = end;
        self.ooo.retain(|b| {
            if b.end < start || b.start > stop {
                true
            } else {
                start = start.min(b.start);
                stop = stop.max(b.end);
                false
            }
        });
        let at = self.ooo.partition_point(|b| b.start < start);
        self.ooo.insert(at, OooBlock {
            start,
            end: stop,
            touched: self.clock,
        });
    }

    fn ack_header(&self) -> TcpHeader {
        let mut sack = Vec::new();
        if self.sack_enabled && !self.ooo.is_empty() {
            let mut recent: Vec<&OooBlock> = self.ooo.iter().collect();
            recent.sort_by(|a, b| b.touched.cmp(&a.touched));
            sack = recent
                .into_iter()
                .take(MAX_SACK_BLOCKS)
                .map(|b| SackBlock {
                    start: b.start,
                    end: b.end,
                })
                .collect();
        }
        TcpHeader {
            seq: 0,
            ack: self.rcv_nxt,
            flags: TcpFlags {
                psh: false,
                ack: true,
            },
            sack,
        }
    }
}
