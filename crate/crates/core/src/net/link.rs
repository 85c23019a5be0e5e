use crate::kernel::SimTime;

/// Point-to-point, store-and-forward link in one direction.
#[derive(Debug, Clone)]
pub struct Link {
    pub rate_bps: u64,
    pub prop_delay: SimTime,
    pub busy_until: SimTime,
}

/// Time to clock `wire_bytes` onto a link of `rate_bps`, rounded up to the
/// next nanosecond.
pub fn serialization_time(wire_bytes: u32, rate_bps: u64) -> SimTime {
    let bits = u128::from(wire_bytes) * 8 * 1_000_000_000;
    let rate = u128::from(rate_bps);
    SimTime::from_nanos(bits.div_ceil(rate) as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Transmission {
    pub start: SimTime,
    /// Last bit leaves the sender; the link is free again.
    pub complete: SimTime,
    /// Last bit reaches the far end.
    pub delivery: SimTime,
}

impl Link {
    pub fn new(rate_bps: u64, prop_delay: SimTime) -> Self {
        Link {
            rate_bps,
            prop_delay,
            busy_until: SimTime::ZERO,
        }
    }

    pub fn is_idle(&self, now: SimTime) -> bool {
        self.busy_until <= now
    }

    pub fn serialization(&self, wire_bytes: u32) -> SimTime {
        serialization_time(wire_bytes, self.rate_bps)
    }

    pub fn transmit(&mut self, wire_bytes: u32, now: SimTime) -> Transmission {
        let start = now.max(self.busy_until);
        self.busy_until = start + self.serialization(wire_bytes);
        Transmission {
            start,
            complete: self.busy_until,
            delivery: self.busy_until + self.prop_delay,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_packet_on_uplink() {
        assert_eq!(serialization_time(1500, 512_000), SimTime::from_nanos(23_437_500));
    }

    #[test]
    fn ack_on_uplink() {
        assert_eq!(serialization_time(40, 512_000), SimTime::from_nanos(625_000));
    }

    #[test]
    fn full_packet_on_downlink() {
        assert_eq!(serialization_time(1500, 6_000_000), SimTime::from_millis(2));
    }

    #[test]
    fn rounds_up_to_next_nanosecond() {
        // 40 B at 6 Mb/s = 53333.33 ns
        assert_eq!(serialization_time(40, 6_000_000), SimTime::from_nanos(53_334));
    }

    #[test]
    fn transmit_queues_behind_busy_link() {
        let mut link = Link::new(512_000, SimTime::ZERO);
        let a = link.transmit(1500, SimTime::ZERO);
        assert_eq!(a.delivery, SimTime::from_nanos(23_437_500));
        let b = link.transmit(40, SimTime::from_millis(1));
        assert_eq!(b.start, a.complete);
        assert_eq!(b.complete, SimTime::from_nanos(23_437_500 + 625_000));

        let mut wan = Link::new(100_000_000, SimTime::from_millis(10));
        let t = wan.transmit(1500, SimTime::from_secs(1));
        assert_eq!(t.delivery, SimTime::from_secs(1) + SimTime::from_nanos(120_000) + SimTime::from_millis(10));
    }
}
