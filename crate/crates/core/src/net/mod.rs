//! Packets, links, drop-tail queues and the access-network topology.

pub mod link;
pub mod packet;
pub mod queue;
pub mod topology;

pub use link::{serialization_time, Link, Transmission};
pub use packet::{Direction, FlowId, NodeId, Packet, SackBlock, TcpFlags, TcpHeader};
pub use queue::{DropTailQueue, Enqueue};
pub use topology::{build_dumbbell, LinkId, Topology, TopologyError, TopologyParams};
