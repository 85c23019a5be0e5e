//! The simulated world: topology, TCP endpoints and traffic sources driven by
//! the event kernel.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernel::{EntityId, Event, EventId, EventKind, Handler, Kernel, KernelError, Payload, SimTime};
use crate::metrics::{
    summarize_traces, DelayStats, FlowTraces, MetricsError, QueueProbe, QueueSummary, QueueTraces, Traces, Window,
};
use crate::net::topology::{DOWNLINK, FTP_CLIENT, FTP_SERVER, GAME_CLIENT, GAME_SERVER, UPLINK};
use crate::net::{build_dumbbell, Direction, Enqueue, FlowId, LinkId, NodeId, Packet, TcpFlags, TcpHeader, Topology, TopologyError};
use crate::scenario::{Role, ScenarioConfig};
use crate::tcp::{SendSeg, TcpReceiver, TcpSender, Variant};
use crate::traffic::{rng_stream, FtpSource, Side, WowGenerator};

/// RNG sub-streams derived from the scenario seed.
pub const STREAM_WOW_CLIENT: u64 = 1;
pub const STREAM_WOW_SERVER: u64 = 2;
pub const STREAM_LOSS: u64 = 3;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Config(#[from] crate::scenario::ConfigError),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone)]
pub enum SimEvent {
    Arrival { node: NodeId, packet: Box<Packet> },
    TxComplete(LinkId),
    Rto(usize),
    App { conn: usize, bytes: u64 },
}

impl Payload for SimEvent {
    fn kind(&self) -> EventKind {
        match self {
            SimEvent::Arrival { .. } => EventKind::PacketArrival,
            SimEvent::TxComplete(_) => EventKind::TransmitComplete,
            SimEvent::Rto(_) => EventKind::TimerExpiry,
            SimEvent::App { .. } => EventKind::AppGenerate,
        }
    }
}

fn node_entity(n: NodeId) -> EntityId {
    EntityId(u32::from(n.0))
}

fn link_entity(l: LinkId) -> EntityId {
    EntityId(100 + u32::from(l.0))
}

fn conn_entity(c: usize) -> EntityId {
    EntityId(200 + c as u32)
}

#[derive(Debug, Clone)]
enum Source {
    Wow(Side),
    Ftp(FtpSource),
}

/// End-to-end checks kept while the run progresses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Integrity {
    /// Deliveries that did not start where the previous one ended.
    pub delivery_gaps: u64,
    /// ACKs whose cumulative number went backwards.
    pub ack_regressions: u64,
    pub min_cwnd: f64,
}

#[derive(Debug, Clone)]
struct Connection {
    name: &'static str,
    app: &'static str,
    flow: FlowId,
    src: NodeId,
    dst: NodeId,
    direction: Direction,
    sender: TcpSender,
    receiver: TcpReceiver,
    source: Source,
    start: SimTime,
    timer: Option<(EventId, SimTime)>,
    integrity: Integrity,
    next_delivery: u64,
    last_ack: u64,
    delivered_in_window: u64,
}

pub struct World {
    topo: Topology,
    conns: Vec<Connection>,
    wow: Option<WowGenerator>,
    loss_rng: ChaCha8Rng,
    loss_prob: f64,
    traces: Traces,
    next_packet_id: u64,
    apps_until: SimTime,
    window: Window,
    packet_log: bool,
    /// Predicted uplink wait per packet id, checked at service start.
    predicted_wait: BTreeMap<u64, SimTime>,
    delay_audit_mismatches: u64,
}

impl World {
    pub fn new(cfg: &ScenarioConfig) -> Result<Self, SimError> {
        let topo = build_dumbbell(&cfg.topology())?;
        let mut conns = Vec::new();
        let mut add = |name, app, src, dst, direction, flow: &crate::scenario::FlowSpec, source| {
            let tcp = cfg.tcp_config(flow);
            let sack = tcp.variant == Variant::Sack;
            conns.push(Connection {
                name,
                app,
                flow: FlowId(conns.len() as u16),
                src,
                dst,
                direction,
                integrity: Integrity {
                    delivery_gaps: 0,
                    ack_regressions: 0,
                    min_cwnd: tcp.initial_cwnd,
                },
                sender: TcpSender::new(tcp),
                receiver: TcpReceiver::new(sack),
                source,
                start: SimTime::from_secs_f64(flow.start_s),
                timer: None,
                next_delivery: 0,
                last_ack: 0,
                delivered_in_window: 0,
            });
        };
        if let Some(f) = cfg.flow(Role::Wow) {
            add("wow", "wow", GAME_CLIENT, GAME_SERVER, Direction::Uplink, f, Source::Wow(Side::Client));
            add("wow_server", "wow", GAME_SERVER, GAME_CLIENT, Direction::Downlink, f, Source::Wow(Side::Server));
        }
        if let Some(f) = cfg.flow(Role::Ftp) {
            let start = SimTime::from_secs_f64(f.start_s);
            add("ftp", "ftp", FTP_CLIENT, FTP_SERVER, Direction::Uplink, f, Source::Ftp(FtpSource::new(start)));
        }

        let mut traces = Traces::default();
        for c in &conns {
            traces.flows.insert(c.name.to_string(), FlowTraces::default());
            if cfg.packet_log {
                traces.packets.entry(c.app.to_string()).or_default();
            }
        }
        for (name, id) in [("uplink", UPLINK), ("downlink", DOWNLINK)] {
            let port = topo.port(id);
            traces.queues.insert(name.to_string(), QueueTraces {
                rate_bps: port.link.rate_bps,
                capacity_pkts: port.queue.capacity(),
                probe: QueueProbe::default(),
            });
        }

        let wow = cfg
            .flow(Role::Wow)
            .map(|_| WowGenerator::new(cfg.traffic.clone(), cfg.seed, STREAM_WOW_CLIENT, STREAM_WOW_SERVER));
        Ok(World {
            topo,
            conns,
            wow,
            loss_rng: rng_stream(cfg.seed, STREAM_LOSS),
            loss_prob: cfg.uplink_random_drop_prob,
            traces,
            next_packet_id: 0,
            apps_until: cfg.duration(),
            window: cfg.window(),
            packet_log: cfg.packet_log,
            predicted_wait: BTreeMap::new(),
            delay_audit_mismatches: 0,
        })
    }

    /// Schedules each source's first activity.
    pub fn start(&mut self, k: &mut Kernel<SimEvent>) -> Result<(), SimError> {
        for c in 0..self.conns.len() {
            let conn = &self.conns[c];
            let start = conn.start;
            let ev = match conn.source {
                Source::Wow(side) => {
                    let first = self.wow.as_mut().expect("game generator").next_apdu(side);
                    (start + first.gap, SimEvent::App { conn: c, bytes: first.bytes })
                }
                Source::Ftp(_) => (start, SimEvent::App { conn: c, bytes: 0 }),
            };
            if ev.0 < self.apps_until {
                k.schedule(ev.0, conn_entity(c), ev.1)?;
            }
            self.observe_cwnd(c, start);
        }
        Ok(())
    }

    fn queue_name(link: LinkId) -> Option<&'static str> {
        match link {
            UPLINK => Some("uplink"),
            DOWNLINK => Some("downlink"),
            _ => None,
        }
    }

    fn observe_queue(&mut self, link: LinkId, now: SimTime) {
        if let Some(name) = Self::queue_name(link) {
            let q = &self.topo.port(link).queue;
            let (len, bytes, drops) = (q.len(), q.bytes(), q.drops());
            if let Some(t) = self.traces.queues.get_mut(name) {
                t.probe.observe(now, len, bytes, drops);
            }
        }
    }

    fn observe_cwnd(&mut self, c: usize, now: SimTime) {
        let conn = &mut self.conns[c];
        let (cwnd, ssthresh) = (conn.sender.cwnd(), conn.sender.ssthresh());
        conn.integrity.min_cwnd = conn.integrity.min_cwnd.min(cwnd);
        if let Some(t) = self.traces.flows.get_mut(conn.name) {
            t.cwnd.observe(now, cwnd, ssthresh);
        }
    }

    fn emit(&mut self, packet: Packet, k: &mut Kernel<SimEvent>) -> Result<(), SimError> {
        let now = k.now();
        if self.packet_log {
            let app = self.conns[packet.flow.0 as usize].app;
            if let Some(log) = self.traces.packets.get_mut(app) {
                log.push(crate::metrics::PacketRecord {
                    time: now,
                    wire_bytes: packet.wire_bytes,
                    direction: packet.direction,
                });
            }
        }
        let link = self.topo.next_hop(packet.src, packet.dst);
        self.enqueue(link, packet, k)
    }

    fn enqueue(&mut self, link: LinkId, packet: Packet, k: &mut Kernel<SimEvent>) -> Result<(), SimError> {
        let now = k.now();
        if link == UPLINK && self.loss_prob > 0.0 && self.loss_rng.random::<f64>() < self.loss_prob {
            self.topo.port_mut(link).queue.record_drop(packet.flow);
            self.observe_queue(link, now);
            return Ok(());
        }
        let port = self.topo.port_mut(link);
        if link == UPLINK {
            // FIFO on a work-conserving link: the wait is the residual of the
            // packet in service plus the serialization of everything queued.
            let residual = port.link.busy_until.saturating_sub(now);
            let ahead = port
                .queue
                .iter()
                .fold(residual, |acc, p| acc + port.link.serialization(p.wire_bytes));
            if port.queue.len() < port.queue.capacity() {
                self.predicted_wait.insert(packet.id, ahead);
            }
        }
        let outcome = port.queue.enqueue(packet, now);
        let idle = !port.transmitting;
        self.observe_queue(link, now);
        if outcome == Enqueue::Accepted && idle {
            self.start_service(link, k)?;
        }
        Ok(())
    }

    fn start_service(&mut self, link: LinkId, k: &mut Kernel<SimEvent>) -> Result<(), SimError> {
        let now = k.now();
        let port = self.topo.port_mut(link);
        let Some(packet) = port.queue.dequeue() else {
            return Ok(());
        };
        let tx = port.link.transmit(packet.wire_bytes, now);
        port.transmitting = true;
        let to = port.to;
        self.observe_queue(link, now);
        if link == UPLINK {
            let wait = tx.start - packet.t_enqueued;
            if self.predicted_wait.remove(&packet.id) != Some(wait) {
                self.delay_audit_mismatches += 1;
            }
            let name = self.conns[packet.flow.0 as usize].name;
            if let Some(t) = self.traces.flows.get_mut(name) {
                t.uplink_delay.record_delay(&packet, tx.start);
            }
        }
        k.schedule(tx.complete, link_entity(link), SimEvent::TxComplete(link))?;
        k.schedule(tx.delivery, node_entity(to), SimEvent::Arrival {
            node: to,
            packet: Box::new(packet),
        })?;
        Ok(())
    }

    fn send_segments(&mut self, c: usize, segs: Vec<SendSeg>, k: &mut Kernel<SimEvent>) -> Result<(), SimError> {
        let now = k.now();
        for s in segs {
            let conn = &self.conns[c];
            let header = TcpHeader {
                seq: s.seq,
                ack: 0,
                flags: TcpFlags { psh: s.psh, ack: false },
                sack: Vec::new(),
            };
            let p = Packet::new(self.next_packet_id, conn.flow, conn.direction, conn.src, conn.dst, header, s.len, now);
            self.next_packet_id += 1;
            self.emit(p, k)?;
        }
        self.sync_timer(c, k)?;
        self.observe_cwnd(c, now);
        Ok(())
    }

    fn sync_timer(&mut self, c: usize, k: &mut Kernel<SimEvent>) -> Result<(), SimError> {
        let conn = &mut self.conns[c];
        let want = conn.sender.timer_deadline();
        if conn.timer.map(|(_, at)| at) == want {
            return Ok(());
        }
        if let Some((id, _)) = conn.timer.take() {
            k.cancel_unchecked(id);
        }
        if let Some(at) = want {
            let id = k.schedule(at.max(k.now()), conn_entity(c), SimEvent::Rto(c))?;
            conn.timer = Some((id, at));
        }
        Ok(())
    }

    fn on_app(&mut self, c: usize, bytes: u64, k: &mut Kernel<SimEvent>) -> Result<(), SimError> {
        let now = k.now();
        if now >= self.apps_until {
            return Ok(());
        }
        let conn = &mut self.conns[c];
        let segs = match &mut conn.source {
            Source::Wow(side) => {
                let side = *side;
                let segs = conn.sender.on_app_data(bytes, now);
                let next = self.wow.as_mut().expect("game generator").next_apdu(side);
                let at = now + next.gap;
                if at < self.apps_until {
                    k.schedule(at, conn_entity(c), SimEvent::App { conn: c, bytes: next.bytes })?;
                }
                segs
            }
            Source::Ftp(src) => {
                src.fill(&mut conn.sender, now);
                conn.sender.transmit(now)
            }
        };
        self.send_segments(c, segs, k)
    }

    fn on_arrival(&mut self, node: NodeId, packet: Packet, k: &mut Kernel<SimEvent>) -> Result<(), SimError> {
        if node != packet.dst {
            let link = self.topo.next_hop(node, packet.dst);
            return self.enqueue(link, packet, k);
        }
        let now = k.now();
        let c = packet.flow.0 as usize;
        if packet.is_data() {
            let in_window = self.window.contains(now);
            let conn = &mut self.conns[c];
            let r = conn.receiver.on_data(packet.header.seq, packet.payload_bytes);
            if let Some(range) = &r.delivered {
                if range.start != conn.next_delivery {
                    conn.integrity.delivery_gaps += 1;
                }
                conn.next_delivery = range.end;
                if in_window {
                    conn.delivered_in_window += range.end - range.start;
                }
            }
            if r.ack.ack < conn.last_ack {
                conn.integrity.ack_regressions += 1;
            }
            conn.last_ack = r.ack.ack;
            let back = match conn.direction {
                Direction::Uplink => Direction::Downlink,
                Direction::Downlink => Direction::Uplink,
            };
            let ack = Packet::new(self.next_packet_id, conn.flow, back, conn.dst, conn.src, r.ack, 0, now);
            self.next_packet_id += 1;
            self.emit(ack, k)
        } else {
            let apps_on = now < self.apps_until;
            let conn = &mut self.conns[c];
            let mut segs = conn.sender.on_ack(&packet.header, now);
            if let (Source::Ftp(src), true) = (&mut conn.source, apps_on) {
                src.fill(&mut conn.sender, now);
                segs.extend(conn.sender.transmit(now));
            }
            self.send_segments(c, segs, k)
        }
    }
}

impl Handler<SimEvent> for World {
    type Error = SimError;

    fn handle(&mut self, event: Event<SimEvent>, k: &mut Kernel<SimEvent>) -> Result<(), SimError> {
        let id = event.id();
        match event.payload {
            SimEvent::Arrival { node, packet } => self.on_arrival(node, *packet, k),
            SimEvent::TxComplete(link) => {
                self.topo.port_mut(link).transmitting = false;
                self.start_service(link, k)
            }
            SimEvent::Rto(c) => {
                if self.conns[c].timer.map(|(t, _)| t) != Some(id) {
                    return Ok(());
                }
                self.conns[c].timer = None;
                let now = k.now();
                let segs = self.conns[c].sender.on_timeout(now);
                self.send_segments(c, segs, k)
            }
            SimEvent::App { conn, bytes } => self.on_app(conn, bytes, k),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowSummary {
    pub application: String,
    pub tcp_variant: Variant,
    pub bytes_written: u64,
    pub bytes_acked: u64,
    pub bytes_delivered: u64,
    /// Delivered payload rate over the measurement window.
    pub goodput_bps: f64,
    pub segments_sent: u64,
    pub retransmissions: u64,
    pub fast_retransmits: u64,
    pub timeouts: u64,
    /// Drops of this connection's packets at the access queues.
    pub drops: u64,
    pub final_cwnd: f64,
    pub integrity: Integrity,
    pub uplink_queuing_delay: DelayStats,
    pub mean_cwnd: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSummary {
    pub events_processed: u64,
    pub events_cancelled: u64,
    pub events_pending: u64,
    pub final_time_s: f64,
    /// Hex digest of the processed event sequence.
    pub trace_digest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub seed: u64,
    pub ftp_variant: Option<Variant>,
    pub uplink_buffer_pkts: u32,
    pub duration_s: f64,
    pub window_s: [f64; 2],
    /// Uplink waits that differed from the bytes-ahead prediction.
    pub delay_audit_mismatches: u64,
    pub flows: BTreeMap<String, FlowSummary>,
    pub queues: BTreeMap<String, QueueSummary>,
    pub kernel: KernelSummary,
    pub config: serde_json::Value,
}

impl RunSummary {
    pub fn flow(&self, name: &str) -> Option<&FlowSummary> {
        self.flows.get(name)
    }

    pub fn uplink(&self) -> &QueueSummary {
        &self.queues["uplink"]
    }

    /// Mean uplink wait of the game client's packets, if any fell in the
    /// window.
    pub fn wow_mean_delay_s(&self) -> Option<f64> {
        self.flow("wow").and_then(|f| f.uplink_queuing_delay.mean_s())
    }
}

pub struct RunOutput {
    pub traces: Traces,
    pub summary: RunSummary,
}

pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunOutput, SimError> {
    let mut world = World::new(cfg)?;
    let mut kernel = Kernel::new();
    world.start(&mut kernel)?;
    let stats = kernel.run_until(cfg.duration() + cfg.drain(), &mut world)?;

    let window = world.window;
    let trace_summary = summarize_traces(&world.traces, window);
    let up = &world.topo.port(UPLINK).queue;
    let down = &world.topo.port(DOWNLINK).queue;
    let window_s = window.len().as_secs_f64();
    let flows = world
        .conns
        .iter()
        .map(|c| {
            let t = &trace_summary.flows[c.name];
            let s = c.sender.stats();
            (c.name.to_string(), FlowSummary {
                application: c.app.to_string(),
                tcp_variant: c.sender.variant(),
                bytes_written: c.sender.app_bytes(),
                bytes_acked: c.sender.snd_una(),
                bytes_delivered: c.receiver.delivered(),
                goodput_bps: c.delivered_in_window as f64 * 8.0 / window_s,
                segments_sent: s.segments_sent,
                retransmissions: s.retransmissions,
                fast_retransmits: s.fast_retransmits,
                timeouts: s.timeouts,
                drops: up.drops_for(c.flow) + down.drops_for(c.flow),
                final_cwnd: c.sender.cwnd(),
                integrity: c.integrity,
                uplink_queuing_delay: t.uplink_queuing_delay,
                mean_cwnd: t.mean_cwnd,
            })
        })
        .collect();
    let summary = RunSummary {
        seed: cfg.seed,
        ftp_variant: cfg.ftp_variant(),
        uplink_buffer_pkts: cfg.uplink_buffer_pkts,
        duration_s: cfg.duration_s,
        window_s: [window.start.as_secs_f64(), window.end.as_secs_f64()],
        delay_audit_mismatches: world.delay_audit_mismatches,
        flows,
        queues: trace_summary.queues,
        kernel: KernelSummary {
            events_processed: stats.processed,
            events_cancelled: stats.cancelled,
            events_pending: stats.pending,
            final_time_s: stats.final_clock.as_secs_f64(),
            trace_digest: format!("{:016x}", kernel.trace_digest()),
        },
        config: serde_json::to_value(cfg)?,
    };
    Ok(RunOutput {
        traces: world.traces,
        summary,
    })
}
