use std::collections::{BTreeMap, VecDeque};

use crate::kernel::SimTime;
use crate::net::packet::{FlowId, Packet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Enqueue {
    Accepted,
    Dropped,
}

/// FIFO with a packet-count limit that discards arrivals when full.
///
/// Occupancy counts packets waiting for the link; the packet currently being
/// serialized has already left the queue.
#[derive(Debug, Clone)]
pub struct DropTailQueue {
    capacity_pkts: u32,
    fifo: VecDeque<Packet>,
    bytes: u64,
    enqueued: u64,
    dequeued: u64,
    drops: u64,
    drops_by_flow: BTreeMap<u16, u64>,
    max_occupancy: u32,
}

impl DropTailQueue {
    pub fn new(capacity_pkts: u32) -> Self {
        DropTailQueue {
            capacity_pkts,
            fifo: VecDeque::new(),
            bytes: 0,
            enqueued: 0,
            dequeued: 0,
            drops: 0,
            drops_by_flow: BTreeMap::new(),
            max_occupancy: 0,
        }
    }

    pub fn enqueue(&mut self, mut packet: Packet, now: SimTime) -> Enqueue {
        if self.fifo.len() as u32 >= self.capacity_pkts {
            self.record_drop(packet.flow);
            return Enqueue::Dropped;
        }
        packet.t_enqueued = now;
        self.bytes += u64::from(packet.wire_bytes);
        self.fifo.push_back(packet);
        self.enqueued += 1;
        self.max_occupancy = self.max_occupancy.max(self.fifo.len() as u32);
        Enqueue::Accepted
    }

    /// Counts a discard decided outside the queue (loss injection) as a drop
    /// at this queue.
    pub fn record_drop(&mut self, flow: FlowId) {
        self.drops += 1;
        *self.drops_by_flow.entry(flow.0).or_default() += 1;
    }

    pub fn dequeue(&mut self) -> Option<Packet> {
        let p = self.fifo.pop_front()?;
        self.bytes -= u64::from(p.wire_bytes);
        self.dequeued += 1;
        Some(p)
    }

    /// Waiting packets, head first.
    pub fn iter(&self) -> impl Iterator<Item = &Packet> {
        self.fifo.iter()
    }

    pub fn capacity(&self) -> u32 {
        self.capacity_pkts
    }

    pub fn len(&self) -> u32 {
        self.fifo.len() as u32
    }

    pub fn is_empty(&self) -> bool {
        self.fifo.is_empty()
    }

    pub fn bytes(&self) -> u64 {
        self.bytes
    }

    pub fn drops(&self) -> u64 {
        self.drops
    }

    pub fn drops_for(&self, flow: FlowId) -> u64 {
        self.drops_by_flow.get(&flow.0).copied().unwrap_or(0)
    }

    pub fn enqueued(&self) -> u64 {
        self.enqueued
    }

    pub fn dequeued(&self) -> u64 {
        self.dequeued
    }

    pub fn max_occupancy(&self) -> u32 {
        self.max_occupancy
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::packet::{Direction, NodeId, TcpHeader};

    fn pkt(id: u64, payload: u32) -> Packet {
        Packet::new(
            id,
            FlowId(1),
            Direction::Uplink,
            NodeId(0),
            NodeId(1),
            TcpHeader::default(),
            payload,
            SimTime::ZERO,
        )
    }

    #[test]
    fn accepts_up_to_capacity_then_drops() {
        let mut q = DropTailQueue::new(20);
        for i in 0..19 {
            assert_eq!(q.enqueue(pkt(i, 1460), SimTime::ZERO), Enqueue::Accepted);
        }
        assert_eq!(q.len(), 19);
        assert_eq!(q.enqueue(pkt(19, 1460), SimTime::ZERO), Enqueue::Accepted);
        assert_eq!(q.len(), 20);
        assert_eq!(q.enqueue(pkt(20, 1460), SimTime::ZERO), Enqueue::Dropped);
        assert_eq!(q.len(), 20);
        assert_eq!(q.drops(), 1);
        assert_eq!(q.drops_for(FlowId(1)), 1);
        assert_eq!(q.drops_for(FlowId(2)), 0);
    }

    #[test]
    fn stamps_enqueue_time_and_tracks_bytes() {
        let mut q = DropTailQueue::new(5);
        q.enqueue(pkt(0, 100), SimTime::from_secs(3));
        q.enqueue(pkt(1, 0), SimTime::from_secs(4));
        assert_eq!(q.bytes(), 180);
        let p = q.dequeue().unwrap();
        assert_eq!(p.t_enqueued, SimTime::from_secs(3));
        assert_eq!(q.bytes(), 40);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn fifo_and_conservation(ops in proptest::collection::vec(any::<bool>(), 0..400), cap in 1u32..30) {
                let mut q = DropTailQueue::new(cap);
                let mut next = 0u64;
                let mut out = Vec::new();
                for op in ops {
                    if op {
                        q.enqueue(pkt(next, 500), SimTime::ZERO);
                        next += 1;
                        prop_assert!(q.len() <= cap);
                    } else if let Some(p) = q.dequeue() {
                        out.push(p.id);
                    }
                }
                prop_assert!(out.windows(2).all(|w| w[0] < w[1]));
                prop_assert_eq!(q.enqueued(), q.dequeued() + u64::from(q.len()));
                prop_assert_eq!(next, q.enqueued() + q.drops());
            }
        }
    }
}
