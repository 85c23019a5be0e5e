use crate::kernel::SimTime;
use crate::net::serialization_time;

/// Steady queuing delay of a single bulk flow pinned at `window` segments on
/// a bottleneck of `rate_bps`: the window's worth of serialization minus the
/// base RTT, floored at zero.
pub fn analytic_delay_oracle(window: u32, wire_bytes: u32, rate_bps: u64, base_rtt: SimTime) -> SimTime {
    let per_packet = serialization_time(wire_bytes, rate_bps);
    let full = SimTime::from_nanos(per_packet.as_nanos() * u64::from(window));
    full.saturating_sub(base_rtt)
}

/// Bandwidth-delay product in segments.
pub fn bdp_segments(wire_bytes: u32, rate_bps: u64, base_rtt: SimTime) -> f64 {
    base_rtt.as_secs_f64() / serialization_time(wire_bytes, rate_bps).as_secs_f64()
}
