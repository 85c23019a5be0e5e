//! The residential dumbbell: two home hosts behind a home router, an
//! asymmetric access link to the ISP router, and one server per application
//! on the far side of a WAN hop.
//!
//! ```text
//!  game client ─┐                                       ┌─ game server
//!               ├─ home router ══ access ══ ISP router ─┤
//!  ftp client  ─┘      (uplink queue)  (downlink queue) └─ ftp server
//! ```

use crate::kernel::SimTime;
use crate::net::link::Link;
use crate::net::packet::NodeId;
use crate::net::queue::DropTailQueue;

pub const GAME_CLIENT: NodeId = NodeId(0);
pub const FTP_CLIENT: NodeId = NodeId(1);
pub const HOME_ROUTER: NodeId = NodeId(2);
pub const ISP_ROUTER: NodeId = NodeId(3);
pub const GAME_SERVER: NodeId = NodeId(4);
pub const FTP_SERVER: NodeId = NodeId(5);

pub const NODE_NAMES: [&str; 6] = [
    "game_client",
    "ftp_client",
    "home_router",
    "isp_router",
    "game_server",
    "ftp_server",
];

/// Propagation delay of each home LAN hop.
pub const LAN_PROP: SimTime = SimTime::from_micros(100);
/// Propagation delay of the access link.
pub const ACCESS_PROP: SimTime = SimTime::from_millis(1);

/// Queue limit for egress queues that are never a bottleneck.
pub const UNBOUNDED_QUEUE_PKTS: u32 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LinkId(pub u8);

#[derive(Debug, Clone, PartialEq)]
pub struct TopologyParams {
    pub uplink_rate_bps: u64,
    pub downlink_rate_bps: u64,
    pub lan_rate_bps: u64,
    pub one_way_delay: SimTime,
    pub uplink_buffer_pkts: u32,
    pub downlink_buffer_pkts: u32,
}

impl Default for TopologyParams {
    fn default() -> Self {
        TopologyParams {
            uplink_rate_bps: 512_000,
            downlink_rate_bps: 6_000_000,
            lan_rate_bps: 100_000_000,
            one_way_delay: SimTime::from_millis(80),
            uplink_buffer_pkts: 200,
            downlink_buffer_pkts: 200,
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum TopologyError {
    #[error("{0} must be positive")]
    NonPositive(&'static str),
    #[error("one-way delay {0} is shorter than the fixed LAN + access propagation")]
    DelayTooShort(SimTime),
}

/// A directed link together with the queue at its sending end.
#[derive(Debug, Clone)]
pub struct Port {
    pub name: &'static str,
    pub from: NodeId,
    pub to: NodeId,
    pub link: Link,
    pub queue: DropTailQueue,
    /// A packet is currently being serialized.
    pub transmitting: bool,
}

#[derive(Debug, Clone)]
pub struct Topology {
    pub ports: Vec<Port>,
    pub wan_prop: SimTime,
}

pub const UPLINK: LinkId = LinkId(0);
pub const DOWNLINK: LinkId = LinkId(1);

impl Topology {
    pub fn port(&self, id: LinkId) -> &Port {
        &self.ports[id.0 as usize]
    }

    pub fn port_mut(&mut self, id: LinkId) -> &mut Port {
        &mut self.ports[id.0 as usize]
    }

    /// Egress port used by `at` to forward a packet addressed to `dst`.
    pub fn next_hop(&self, at: NodeId, dst: NodeId) -> LinkId {
        let server_side = dst == GAME_SERVER || dst == FTP_SERVER;
        let to = match at {
            GAME_CLIENT | FTP_CLIENT => HOME_ROUTER,
            HOME_ROUTER if server_side => ISP_ROUTER,
            HOME_ROUTER => dst,
            ISP_ROUTER if server_side => dst,
            ISP_ROUTER => HOME_ROUTER,
            _ => ISP_ROUTER,
        };
        self.link_between(at, to)
            .unwrap_or_else(|| panic!("no route from {at:?} to {dst:?}"))
    }

    pub fn link_between(&self, from: NodeId, to: NodeId) -> Option<LinkId> {
        self.ports
            .iter()
            .position(|p| p.from == from && p.to == to)
            .map(|i| LinkId(i as u8))
    }

    /// Total propagation delay along the forwarding path.
    pub fn path_propagation(&self, src: NodeId, dst: NodeId) -> SimTime {
        let mut at = src;
        let mut total = SimTime::ZERO;
        while at != dst {
            let port = self.port(self.next_hop(at, dst));
            total += port.link.prop_delay;
            at = port.to;
        }
        total
    }
}

/// Builds the home-access dumbbell.
///
/// The one-way delay is split as 0.1 ms per LAN hop, 1 ms on the access link
/// and the remainder on the WAN hop. WAN hops run at the LAN rate.
pub fn build_dumbbell(params: &TopologyParams) -> Result<Topology, TopologyError> {
    for (value, name) in [
        (params.uplink_rate_bps, "uplink_rate_bps"),
        (params.downlink_rate_bps, "downlink_rate_bps"),
        (params.lan_rate_bps, "lan_rate_bps"),
        (u64::from(params.uplink_buffer_pkts), "uplink_buffer_pkts"),
        (u64::from(params.downlink_buffer_pkts), "downlink_buffer_pkts"),
    ] {
        if value == 0 {
            return Err(TopologyError::NonPositive(name));
        }
    }
    let wan_prop = params
        .one_way_delay
        .checked_sub(LAN_PROP + ACCESS_PROP)
        .ok_or(TopologyError::DelayTooShort(params.one_way_delay))?;

    let port = |name, from, to, rate, prop, cap| Port {
        name,
        from,
        to,
        link: Link::new(rate, prop),
        queue: DropTailQueue::new(cap),
        transmitting: false,
    };
    let lan = params.lan_rate_bps;
    let big = UNBOUNDED_QUEUE_PKTS;
    // Order fixes UPLINK = 0 and DOWNLINK = 1.
    let ports = vec![
        port("uplink", HOME_ROUTER, ISP_ROUTER, params.uplink_rate_bps, ACCESS_PROP, params.uplink_buffer_pkts),
        port("downlink", ISP_ROUTER, HOME_ROUTER, params.downlink_rate_bps, ACCESS_PROP, params.downlink_buffer_pkts),
        port("lan_game_up", GAME_CLIENT, HOME_ROUTER, lan, LAN_PROP, big),
        port("lan_game_down", HOME_ROUTER, GAME_CLIENT, lan, LAN_PROP, big),
        port("lan_ftp_up", FTP_CLIENT, HOME_ROUTER, lan, LAN_PROP, big),
        port("lan_ftp_down", HOME_ROUTER, FTP_CLIENT, lan, LAN_PROP, big),
        port("wan_game_up", ISP_ROUTER, GAME_SERVER, lan, wan_prop, big),
        port("wan_game_down", GAME_SERVER, ISP_ROUTER, lan, wan_prop, big),
        port("wan_ftp_up", ISP_ROUTER, FTP_SERVER, lan, wan_prop, big),
        port("wan_ftp_down", FTP_SERVER, ISP_ROUTER, lan, wan_prop, big),
    ];
    Ok(Topology { ports, wan_prop })
}
