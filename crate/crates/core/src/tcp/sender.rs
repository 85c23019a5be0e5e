//! Congestion-controlled TCP sender.
//!
//! The window is counted in segments (fractional `cwnd`). Each segment keeps
//! its boundaries for life, so retransmissions reuse them and cumulative ACKs
//! always land on a boundary.
//!
//! Every outstanding segment carries three flags: `sacked` (reported by the
//! receiver), `lost` (presumed dropped, waiting for retransmission) and
//! `in_flight` (the latest copy is believed to be in the network). The
//! transmit loop sends while the in-flight count is below the effective
//! window, picking lost segments first and new data second. For SACK this
//! in-flight count is the scoreboard's `pipe`; for New Reno and Vegas no
//! segment is ever SACKed and it reduces to the classic outstanding count.

use std::collections::VecDeque;

use crate::kernel::SimTime;
use crate::net::packet::{TcpHeader, MSS};
use crate::tcp::rtt::RttEstimator;
use crate::tcp::vegas::VegasState;
use crate::tcp::{TcpConfig, Variant};

/// Segments SACKed above a hole before the hole is presumed lost.
pub const DUP_THRESH: u32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Open,
    FastRecovery,
    RtoRecovery,
}

#[derive(Debug, Clone)]
pub struct Segment {
    pub seq: u64,
    pub len: u32,
    pub psh: bool,
    pub sent_at: SimTime,
    pub transmissions: u32,
    pub sacked: bool,
    pub lost: bool,
    pub in_flight: bool,
}

impl Segment {
    pub fn end(&self) -> u64 {
        self.seq + u64::from(self.len)
    }
}

/// A segment the sender wants on the wire now.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SendSeg {
    pub seq: u64,
    pub len: u32,
    pub psh: bool,
    pub retransmission: bool,
}

#[derive(Debug, Clone, Copy)]
struct Chunk {
    len: u32,
    psh: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SenderStats {
    pub segments_sent: u64,
    pub retransmissions: u64,
    pub fast_retransmits: u64,
    pub timeouts: u64,
    pub rtt_samples: u64,
}

#[derive(Debug, Clone)]
pub struct TcpSender {
    cfg: TcpConfig,
    cwnd: f64,
    ssthresh: f64,
    snd_una: u64,
    snd_nxt: u64,
    app_bytes: u64,
    pending: VecDeque<Chunk>,
    pending_bytes: u64,
    outstanding: VecDeque<Segment>,
    dupacks: u32,
    mode: Mode,
    recovery_point: u64,
    rtt: RttEstimator,
    rto_deadline: Option<SimTime>,
    vegas: Option<VegasState>,
    stats: SenderStats,
}

impl TcpSender {
    pub fn new(cfg: TcpConfig) -> Self {
        let vegas = (cfg.variant == Variant::Vegas).then(|| VegasState::new(cfg.vegas));
        TcpSender {
            cwnd: cfg.initial_cwnd,
            ssthresh: f64::from(cfg.adv_window),
            snd_una: 0,
            snd_nxt: 0,
            app_bytes: 0,
            pending: VecDeque::new(),
            pending_bytes: 0,
            outstanding: VecDeque::new(),
            dupacks: 0,
            mode: Mode::Open,
            recovery_point: 0,
            rtt: RttEstimator::new(cfg.min_rto, cfg.initial_rto),
            rto_deadline: None,
            vegas,
            stats: SenderStats::default(),
            cfg,
        }
    }

    pub fn config(&self) -> &TcpConfig {
        &self.cfg
    }

    pub fn variant(&self) -> Variant {
        self.cfg.variant
    }

    pub fn cwnd(&self) -> f64 {
        self.cwnd
    }

    pub fn ssthresh(&self) -> f64 {
        self.ssthresh
    }

    pub fn snd_una(&self) -> u64 {
        self.snd_una
    }

    pub fn snd_nxt(&self) -> u64 {
        self.snd_nxt
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn dupacks(&self) -> u32 {
        self.dupacks
    }

    pub fn recovery_point(&self) -> u64 {
        self.recovery_point
    }

    pub fn rtt(&self) -> &RttEstimator {
        &self.rtt
    }

    pub fn vegas(&self) -> Option<&VegasState> {
        self.vegas.as_ref()
    }

    pub fn stats(&self) -> &SenderStats {
        &self.stats
    }

    /// Total bytes the application has written.
    pub fn app_bytes(&self) -> u64 {
        self.app_bytes
    }

    pub fn pending_bytes(&self) -> u64 {
        self.pending_bytes
    }

    pub fn outstanding(&self) -> impl Iterator<Item = &Segment> {
        self.outstanding.iter()
    }

    /// Unacknowledged segments, SACKed or not.
    pub fn flight_size(&self) -> u32 {
        self.outstanding.len() as u32
    }

    /// Segments believed to be in the network.
    pub fn pipe(&self) -> u32 {
        self.outstanding
            .iter()
            .filter(|s| s.in_flight && !s.sacked)
            .count() as u32
    }

    pub fn effective_window(&self) -> f64 {
        self.cwnd.min(f64::from(self.cfg.adv_window))
    }

    /// All written data has been acknowledged.
    pub fn is_idle(&self) -> bool {
        self.outstanding.is_empty() && self.pending.is_empty()
    }

    pub fn timer_deadline(&self) -> Option<SimTime> {
        self.rto_deadline
    }

    /// New segments the window would admit right now.
    pub fn window_room(&self) -> u32 {
        let wnd = self.effective_window().floor() as u32;
        let by_cwnd = wnd.saturating_sub(self.pipe());
        let by_adv = self.cfg.adv_window.saturating_sub(self.flight_size());
        by_cwnd.min(by_adv)
    }

    /// Full-MSS chunks the bulk source has not yet handed over.
    pub fn pending_segments(&self) -> u32 {
        self.pending.len() as u32
    }

    /// Queues one application message, split into MSS chunks with PSH on the
    /// last one, and sends whatever the window allows.
    pub fn on_app_data(&mut self, apdu_bytes: u64, now: SimTime) -> Vec<SendSeg> {
        assert!(apdu_bytes >= 1, "empty application write");
        let mss = u64::from(self.cfg.mss);
        let mut left = apdu_bytes;
        while left > 0 {
            let len = left.min(mss);
            left -= len;
            self.pending.push_back(Chunk {
                len: len as u32,
                psh: left == 0,
            });
        }
        self.pending_bytes += apdu_bytes;
        self.app_bytes += apdu_bytes;
        self.transmit(now)
    }

    /// Appends `segments` full-MSS chunks of bulk data without sending.
    pub fn push_bulk(&mut self, segments: u32) {
        for _ in 0..segments {
            self.pending.push_back(Chunk {
                len: self.cfg.mss,
                psh: false,
            });
        }
        let bytes = u64::from(segments) * u64::from(self.cfg.mss);
        self.pending_bytes += bytes;
        self.app_bytes += bytes;
    }

    pub fn on_ack(&mut self, ack: &TcpHeader, now: SimTime) -> Vec<SendSeg> {
        if !ack.flags.ack || ack.ack < self.snd_una || ack.ack > self.snd_nxt {
            return Vec::new();
        }
        if self.cfg.variant == Variant::Sack {
            self.apply_sack(ack);
        }
        let mut out = Vec::new();
        if ack.ack > self.snd_una {
            self.on_new_ack(ack.ack, now, &mut out);
        } else if !self.outstanding.is_empty() {
            self.on_dupack(now, &mut out);
        }
        out.extend(self.transmit(now));
        out
    }

    fn apply_sack(&mut self, ack: &TcpHeader) {
        for block in &ack.sack {
            for seg in self.outstanding.iter_mut() {
                if seg.seq >= block.start && seg.end() <= block.end {
                    seg.sacked = true;
                }
            }
        }
    }

    fn on_new_ack(&mut self, ack: u64, now: SimTime, out: &mut Vec<SendSeg>) {
        let mut acked = 0u32;
        let mut any_retransmitted = false;
        let mut newest_sent = None;
        while let Some(front) = self.outstanding.front() {
            if front.end() > ack {
                break;
            }
            let seg = self.outstanding.pop_front().expect("front exists");
            acked += 1;
            any_retransmitted |= seg.transmissions > 1;
            newest_sent = Some(seg.sent_at);
        }
        self.snd_una = ack;
        self.dupacks = 0;

        // Karn: no sample when the ACK covers retransmitted data.
        if let (false, Some(sent)) = (any_retransmitted, newest_sent) {
            let sample = now - sent;
            self.rtt.on_sample(sample);
            self.stats.rtt_samples += 1;
            if let Some(v) = self.vegas.as_mut() {
                v.on_rtt_sample(sample);
            }
        }

        match self.mode {
            Mode::Open => self.grow_window(),
            Mode::RtoRecovery => {
                self.slow_start_or_avoid();
                if ack >= self.recovery_point {
                    self.mode = Mode::Open;
                }
            }
            Mode::FastRecovery => {
                if ack >= self.recovery_point {
                    self.cwnd = self.ssthresh;
                    self.mode = Mode::Open;
                } else {
                    self.on_partial_ack(acked, now, out);
                }
            }
        }
        if self.mode == Mode::Open {
            self.maybe_close_vegas_epoch();
        }

        self.rto_deadline = (!self.outstanding.is_empty()).then(|| now + self.rtt.rto());
    }

    fn slow_start_or_avoid(&mut self) {
        if self.cwnd < self.ssthresh {
            self.cwnd += 1.0;
        } else {
            self.cwnd += 1.0 / self.cwnd;
        }
    }

    fn grow_window(&mut self) {
        // Vegas only moves the window at epoch boundaries.
        if self.vegas.is_none() {
            self.slow_start_or_avoid();
        }
    }

    fn maybe_close_vegas_epoch(&mut self) {
        let snd_una = self.snd_una;
        let snd_nxt = self.snd_nxt;
        let Some(v) = self.vegas.as_mut() else {
            return;
        };
        match v.epoch_end_seq {
            None => v.epoch_end_seq = Some(snd_nxt),
            Some(end) if snd_una > end => {
                if let Some(rtt) = v.epoch_min_rtt {
                    self.cwnd = v.on_epoch(self.cwnd, rtt);
                    if !v.slow_start {
                        self.ssthresh = self.ssthresh.min(self.cwnd);
                    }
                }
                v.epoch_end_seq = Some(snd_nxt);
                v.epoch_min_rtt = None;
            }
            Some(_) => {}
        }
    }

    fn on_partial_ack(&mut self, acked: u32, now: SimTime, out: &mut Vec<SendSeg>) {
        match self.cfg.variant {
            Variant::Sack => self.mark_sack_losses(),
            Variant::NewReno | Variant::Vegas => {
                // Deflate by what was acked, add back one for the retransmission.
                self.cwnd = (self.cwnd - f64::from(acked) + 1.0).max(1.0);
                if let Some(s) = self.retransmit_front(now) {
                    out.push(s);
                }
            }
        }
    }

    fn on_dupack(&mut self, now: SimTime, out: &mut Vec<SendSeg>) {
        self.dupacks += 1;
        match self.mode {
            Mode::Open if self.dupacks == DUP_THRESH => self.enter_fast_recovery(now, out),
            Mode::Open | Mode::RtoRecovery => {}
            Mode::FastRecovery => match self.cfg.variant {
                Variant::Sack => self.mark_sack_losses(),
                Variant::NewReno | Variant::Vegas => self.cwnd += 1.0,
            },
        }
    }

    fn halve(&mut self) {
        self.ssthresh = f64::from((self.flight_size() / 2).max(2));
    }

    fn enter_fast_recovery(&mut self, now: SimTime, out: &mut Vec<SendSeg>) {
        self.halve();
        self.mode = Mode::FastRecovery;
        self.recovery_point = self.snd_nxt;
        self.stats.fast_retransmits += 1;
        match self.cfg.variant {
            Variant::Sack => {
                self.cwnd = self.ssthresh;
                self.mark_sack_losses();
                if let Some(first) = self.outstanding.iter_mut().find(|s| !s.sacked) {
                    first.lost = true;
                    first.in_flight = false;
                }
                if let Some(s) = self.retransmit_first_lost(now) {
                    out.push(s);
                }
            }
            Variant::NewReno | Variant::Vegas => {
                self.cwnd = self.ssthresh + f64::from(DUP_THRESH);
                if let Some(s) = self.retransmit_front(now) {
                    out.push(s);
                }
            }
        }
    }

    /// Scoreboard loss inference: a never-retransmitted hole with at least
    /// `DUP_THRESH` SACKed segments above it is presumed lost.
    fn mark_sack_losses(&mut self) {
        let mut sacked_above = 0u32;
        for seg in self.outstanding.iter_mut().rev() {
            if seg.sacked {
                sacked_above += 1;
            } else if sacked_above >= DUP_THRESH && seg.transmissions == 1 && !seg.lost {
                seg.lost = true;
                seg.in_flight = false;
            }
        }
    }

    pub fn on_timeout(&mut self, now: SimTime) -> Vec<SendSeg> {
        self.rto_deadline = None;
        if self.outstanding.is_empty() {
            return Vec::new();
        }
        self.stats.timeouts += 1;
        self.halve();
        self.cwnd = 1.0;
        self.rtt.back_off();
        self.mode = Mode::RtoRecovery;
        self.recovery_point = self.snd_nxt;
        self.dupacks = 0;
        for seg in self.outstanding.iter_mut() {
            // The receiver may renege, so SACK state is discarded.
            seg.sacked = false;
            seg.lost = true;
            seg.in_flight = false;
        }
        if let Some(v) = self.vegas.as_mut() {
            v.reset_epoch();
        }
        let mut out = Vec::new();
        if let Some(s) = self.retransmit_first_lost(now) {
            out.push(s);
        }
        out.extend(self.transmit(now));
        out
    }

    fn retransmit_front(&mut self, now: SimTime) -> Option<SendSeg> {
        let first = self.outstanding.front_mut()?;
        first.lost = true;
        first.in_flight = false;
        self.retransmit_first_lost(now)
    }

    fn retransmit_first_lost(&mut self, now: SimTime) -> Option<SendSeg> {
        let idx = self.outstanding.iter().position(|s| s.lost && !s.sacked)?;
        Some(self.send_existing(idx, now))
    }

    fn send_existing(&mut self, idx: usize, now: SimTime) -> SendSeg {
        let seg = &mut self.outstanding[idx];
        seg.lost = false;
        seg.in_flight = true;
        seg.transmissions += 1;
        seg.sent_at = now;
        let s = SendSeg {
            seq: seg.seq,
            len: seg.len,
            psh: seg.psh,
            retransmission: true,
        };
        self.stats.segments_sent += 1;
        self.stats.retransmissions += 1;
        if self.rto_deadline.is_none() {
            self.rto_deadline = Some(now + self.rtt.rto());
        }
        s
    }

    /// Sends lost segments, then new data, while the window allows.
    pub fn transmit(&mut self, now: SimTime) -> Vec<SendSeg> {
        let mut out = Vec::new();
        let wnd = self.effective_window().floor().max(1.0) as u32;
        let mut pipe = self.pipe();
        while pipe < wnd {
            if let Some(idx) = self.outstanding.iter().position(|s| s.lost && !s.sacked) {
                out.push(self.send_existing(idx, now));
            } else if !self.pending.is_empty() && self.flight_size() < self.cfg.adv_window {
                out.push(self.send_new(now));
            } else {
                break;
            }
            pipe += 1;
        }
        out
    }

    fn send_new(&mut self, now: SimTime) -> SendSeg {
        let chunk = self.pending.pop_front().expect("pending data");
        self.pending_bytes -= u64::from(chunk.len);
        let seg = Segment {
            seq: self.snd_nxt,
            len: chunk.len,
            psh: chunk.psh,
            sent_at: now,
            transmissions: 1,
            sacked: false,
            lost: false,
            in_flight: true,
        };
        self.snd_nxt += u64::from(chunk.len);
        let s = SendSeg {
            seq: seg.seq,
            len: seg.len,
            psh: seg.psh,
            retransmission: false,
        };
        self.outstanding.push_back(seg);
        self.stats.segments_sent += 1;
        if self.rto_deadline.is_none() {
            self.rto_deadline = Some(now + self.rtt.rto());
        }
        s
    }

    #[cfg(test)]
    pub(crate) fn force_window(&mut self, cwnd: f64, ssthresh: f64) {
        self.cwnd = cwnd;
        self.ssthresh = ssthresh;
    }

    #[cfg(test)]
    pub(crate) fn vegas_mut(&mut self) -> Option<&mut VegasState> {
        self.vegas.as_mut()
    }
}

impl Default for TcpSender {
    fn default() -> Self {
        Self::new(TcpConfig::default())
    }
}

const _: () = assert!(MSS == 1460);

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::packet::{SackBlock, TcpFlags};
    use crate::tcp::receiver::TcpReceiver;

    const M: u64 = MSS as u64;

    fn cfg(variant: Variant) -> TcpConfig {
        TcpConfig {
            variant,
            ..TcpConfig::default()
        }
    }

    fn ack(n: u64) -> TcpHeader {
        TcpHeader {
            seq: 0,
            ack: n,
            flags: TcpFlags {
                psh: false,
                ack: true,
            },
            sack: Vec::new(),
        }
    }

    fn ack_sack(n: u64, blocks: &[(u64, u64)]) -> TcpHeader {
        TcpHeader {
            sack: blocks
                .iter()
                .map(|&(s, e)| SackBlock { start: s, end: e })
                .collect(),
            ..ack(n)
        }
    }

    fn t(ms: u64) -> SimTime {
        SimTime::from_millis(ms)
    }

    /// A sender with `n` full segments outstanding and the given window.
    fn with_flight(variant: Variant, n: u32, cwnd: f64, ssthresh: f64) -> TcpSender {
        let mut s = TcpSender::new(cfg(variant));
        s.force_window(f64::from(n), ssthresh);
        s.push_bulk(n);
        let sent = s.transmit(t(0));
        assert_eq!(sent.len(), n as usize);
        s.force_window(cwnd, ssthresh);
        s
    }

    #[test]
    fn small_apdu_is_one_pushed_segment() {
        let mut s = TcpSender::default();
        let out = s.on_app_data(100, t(0));
        assert_eq!(out, vec![SendSeg {
            seq: 0,
            len: 100,
            psh: true,
            retransmission: false
        }]);
    }

    #[test]
    fn large_apdu_is_chunked_at_mss() {
        let mut s = TcpSender::new(TcpConfig {
            initial_cwnd: 4.0,
            ..TcpConfig::default()
        });
        let out = s.on_app_data(3000, t(0));
        let lens: Vec<u32> = out.iter().map(|x| x.len).collect();
        assert_eq!(lens, vec![1460, 1460, 80]);
        let psh: Vec<bool> = out.iter().map(|x| x.psh).collect();
        assert_eq!(psh, vec![false, false, true]);
    }

    #[test]
    fn closed_window_buffers_data() {
        let mut s = with_flight(Variant::Sack, 2, 2.0, 64.0);
        assert_eq!(s.window_room(), 0);
        let out = s.on_app_data(500, t(1));
        assert!(out.is_empty());
        assert_eq!(s.pending_bytes(), 500);
    }

    #[test]
    fn congestion_avoidance_adds_one_over_cwnd() {
        let mut s = with_flight(Variant::NewReno, 8, 8.0, 4.0);
        s.on_ack(&ack(M), t(100));
        assert_eq!(s.cwnd(), 8.125);
    }

    #[test]
    fn slow_start_adds_one_per_ack() {
        let mut s = with_flight(Variant::NewReno, 4, 4.0, 64.0);
        s.on_ack(&ack(M), t(100));
        assert_eq!(s.cwnd(), 5.0);
    }

    #[test]
    fn new_reno_third_dupack_halves_and_inflates() {
        let mut s = with_flight(Variant::NewReno, 10, 10.0, 64.0);
        let mut retx = Vec::new();
        for i in 0..3 {
            retx.extend(s.on_ack(&ack(0), t(100 + i)));
        }
        assert_eq!(s.ssthresh(), 5.0);
        assert_eq!(s.cwnd(), 8.0);
        assert_eq!(s.mode(), Mode::FastRecovery);
        assert_eq!(retx, vec![SendSeg {
            seq: 0,
            len: 1460,
            psh: false,
            retransmission: true
        }]);
    }

    #[test]
    fn new_reno_partial_ack_retransmits_next_hole() {
        let mut s = with_flight(Variant::NewReno, 10, 10.0, 64.0);
        for i in 0..3 {
            s.on_ack(&ack(0), t(100 + i));
        }
        let out = s.on_ack(&ack(3 * M), t(300));
        assert_eq!(s.mode(), Mode::FastRecovery);
        assert_eq!(out[0].seq, 3 * M);
        assert!(out[0].retransmission);
        // 8 - 3 acked + 1
        assert_eq!(s.cwnd(), 6.0);
        s.on_ack(&ack(10 * M), t(400));
        assert_eq!(s.mode(), Mode::Open);
        assert_eq!(s.cwnd(), 5.0);
    }

    #[test]
    fn sack_retransmits_only_the_hole() {
        let mut s = with_flight(Variant::Sack, 5, 5.0, 64.0);
        let mut out = s.on_ack(&ack(M), t(100));
        assert!(out.is_empty());
        let seg = |i: u64| (i * M, (i + 1) * M);
        // Segments are numbered 1..=5; 2 is missing, 3..=5 arrive.
        out.extend(s.on_ack(&ack_sack(M, &[seg(2)]), t(101)));
        out.extend(s.on_ack(&ack_sack(M, &[(2 * M, 4 * M)]), t(102)));
        out.extend(s.on_ack(&ack_sack(M, &[(2 * M, 5 * M)]), t(103)));
        assert_eq!(s.mode(), Mode::FastRecovery);
        let retx: Vec<u64> = out.iter().filter(|x| x.retransmission).map(|x| x.seq).collect();
        assert_eq!(retx, vec![M]);
        assert_eq!(s.ssthresh(), 2.0);
        assert_eq!(s.cwnd(), 2.0);
        assert_eq!(s.pipe(), 1);
    }

    #[test]
    fn sack_recovery_ends_at_recovery_point() {
        let mut s = with_flight(Variant::Sack, 5, 5.0, 64.0);
        for k in 1..=3u64 {
            s.on_ack(&ack_sack(0, &[(M, (k + 1) * M)]), t(100 + k));
        }
        assert_eq!(s.mode(), Mode::FastRecovery);
        s.on_ack(&ack(5 * M), t(300));
        assert_eq!(s.mode(), Mode::Open);
        assert_eq!(s.cwnd(), s.ssthresh());
    }

    #[test]
    fn timeout_halves_and_resets_cwnd() {
        let mut s = with_flight(Variant::Sack, 16, 16.0, 64.0);
        let out = s.on_timeout(t(1000));
        assert_eq!(s.ssthresh(), 8.0);
        assert_eq!(s.cwnd(), 1.0);
        assert_eq!(s.mode(), Mode::RtoRecovery);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].seq, 0);
    }

    #[test]
    fn consecutive_timeouts_double_rto() {
        let mut s = with_flight(Variant::NewReno, 4, 4.0, 64.0);
        let base = s.rtt().rto();
        let mut now = t(0);
        let mut gaps = Vec::new();
        for _ in 0..3 {
            let deadline = s.timer_deadline().unwrap();
            gaps.push(deadline - now);
            now = deadline;
            s.on_timeout(now);
        }
        let n = |x: SimTime| x.as_nanos();
        assert_eq!(gaps.iter().map(|g| n(*g) / n(base)).collect::<Vec<_>>(), vec![1, 2, 4]);
    }

    #[test]
    fn timeout_without_data_is_a_no_op() {
        let mut s = TcpSender::default();
        assert!(s.on_timeout(t(5)).is_empty());
        assert_eq!(s.cwnd(), 2.0);
        assert_eq!(s.stats().timeouts, 0);
    }

    #[test]
    fn karn_skips_retransmitted_segments() {
        let mut s = with_flight(Variant::NewReno, 2, 2.0, 64.0);
        s.on_timeout(t(1000));
        s.on_ack(&ack(M), t(1200));
        assert_eq!(s.stats().rtt_samples, 0);
        s.on_ack(&ack(2 * M), t(1300));
        assert_eq!(s.stats().rtt_samples, 0);
        let out = s.on_app_data(10, t(1400));
        assert_eq!(out.len(), 1);
        s.on_ack(&ack(2 * M + 10), t(1560));
        assert_eq!(s.rtt().latest(), Some(t(160)));
    }

    #[test]
    fn old_ack_is_ignored() {
        let mut s = with_flight(Variant::NewReno, 4, 4.0, 64.0);
        s.on_ack(&ack(2 * M), t(100));
        let before = s.cwnd();
        assert!(s.on_ack(&ack(M), t(110)).is_empty());
        assert_eq!(s.cwnd(), before);
        assert_eq!(s.dupacks(), 0);
    }

    #[test]
    fn effective_window_respects_advertised_cap() {
        let mut s = TcpSender::new(TcpConfig {
            adv_window: 3,
            ..TcpConfig::default()
        });
        s.force_window(50.0, 64.0);
        s.push_bulk(10);
        assert_eq!(s.transmit(t(0)).len(), 3);
        assert_eq!(s.window_room(), 0);
    }

    #[test]
    fn vegas_has_no_per_ack_growth_in_avoidance() {
        let mut s = with_flight(Variant::Vegas, 8, 8.0, 4.0);
        {
            let v = s.vegas_mut().unwrap();
            v.slow_start = false;
            // Closes once data past the seventh segment is acked.
            v.epoch_end_seq = Some(7 * M);
        }
        s.on_ack(&ack(M), t(160));
        assert_eq!(s.cwnd(), 8.0);
        // Closing the epoch with an RTT equal to the base grows by one.
        for k in 2..=8 {
            s.on_ack(&ack(k * M), t(160));
        }
        assert_eq!(s.cwnd(), 9.0);
    }

    /// Lossless in-memory loop between one sender and one receiver.
    fn drive(variant: Variant, bytes: u64, drop_every: Option<usize>) -> (TcpSender, TcpReceiver) {
        let mut s = TcpSender::new(cfg(variant));
        let mut r = TcpReceiver::new(variant == Variant::Sack);
        let mut now = t(0);
        let mut wire: VecDeque<SendSeg> = s.on_app_data(bytes, now).into();
        let mut n = 0usize;
        let mut rounds = 0;
        while !s.is_idle() {
            rounds += 1;
            assert!(rounds < 100_000, "no progress");
            now += t(10);
            let Some(seg) = wire.pop_front() else {
                let d = s.timer_deadline().expect("timer armed");
                now = now.max(d);
                wire.extend(s.on_timeout(now));
                continue;
            };
            n += 1;
            if drop_every.is_some_and(|k| n % k == 0) {
                continue;
            }
            let got = r.on_data(seg.seq, seg.len);
            wire.extend(s.on_ack(&got.ack, now));
        }
        (s, r)
    }

    #[test]
    fn lossless_transfer_completes() {
        for v in [Variant::Sack, Variant::NewReno, Variant::Vegas] {
            let (s, r) = drive(v, 200_000, None);
            assert_eq!(r.delivered(), 200_000, "{v:?}");
            assert_eq!(s.snd_una(), 200_000);
        }
    }

    #[test]
    fn lossy_transfer_completes() {
        for v in [Variant::Sack, Variant::NewReno, Variant::Vegas] {
            for k in [3, 7, 13] {
                let (_, r) = drive(v, 100_000, Some(k));
                assert_eq!(r.delivered(), 100_000, "{v:?} drop every {k}");
            }
        }
    }
}
