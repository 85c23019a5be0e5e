//! Discrete-event kernel: integer-nanosecond clock, ordered event queue and
//! the run loop.
//!
//! Events are totally ordered by `(fire_at, seq)`. The sequence number is
//! issued at scheduling time, so two events scheduled for the same instant
//! fire in the order they were scheduled.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};
use std::fmt;
use std::hash::{DefaultHasher, Hasher};
use std::ops::{Add, AddAssign, Sub};
use std::time::Duration;

use thiserror::Error;

/// Simulated time, in nanoseconds since the start of the run.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SimTime(u64);

impl SimTime {
    pub const ZERO: SimTime = SimTime(0);
    pub const MAX: SimTime = SimTime(u64::MAX);

    pub const fn from_nanos(ns: u64) -> Self {
        SimTime(ns)
    }

    pub const fn from_micros(us: u64) -> Self {
        SimTime(us * 1_000)
    }

    pub const fn from_millis(ms: u64) -> Self {
        SimTime(ms * 1_000_000)
    }

    pub const fn from_secs(s: u64) -> Self {
        SimTime(s * 1_000_000_000)
    }

    /// Rounds to the nearest nanosecond. Negative and NaN inputs clamp to zero.
    pub fn from_secs_f64(s: f64) -> Self {
        if s.is_nan() || s <= 0.0 {
            return SimTime::ZERO;
        }
        SimTime((s * 1e9).round() as u64)
    }

    pub fn from_duration(d: Duration) -> Self {
        SimTime(d.as_nanos() as u64)
    }

    pub const fn as_nanos(self) -> u64 {
        self.0
    }

    pub fn as_secs_f64(self) -> f64 {
        self.0 as f64 / 1e9
    }

    pub fn saturating_sub(self, rhs: SimTime) -> SimTime {
        SimTime(self.0.saturating_sub(rhs.0))
    }

    pub fn checked_sub(self, rhs: SimTime) -> Option<SimTime> {
        self.0.checked_sub(rhs.0).map(SimTime)
    }

    /// `secs.nanos` with exactly nine fractional digits.
    pub fn to_fixed9(self) -> String {
        format!("{}.{:09}", self.0 / 1_000_000_000, self.0 % 1_000_000_000)
    }

    /// Parses the `to_fixed9` representation (or any decimal with at most
    /// nine fractional digits) without going through floating point.
    pub fn parse_fixed9(s: &str) -> Option<SimTime> {
        let (whole, frac) = match s.split_once('.') {
            Some((w, f)) => (w, f),
            None => (s, ""),
        };
        if frac.len() > 9 || whole.is_empty() {
            return None;
        }
        let whole: u64 = whole.parse().ok()?;
        let mut frac_ns: u64 = 0;
        if !frac.is_empty() {
            frac_ns = frac.parse().ok()?;
            frac_ns *= 10u64.pow(9 - frac.len() as u32);
        }
        whole
            .checked_mul(1_000_000_000)?
            .checked_add(frac_ns)
            .map(SimTime)
    }
}

impl Add for SimTime {
    type Output = SimTime;
    fn add(self, rhs: SimTime) -> SimTime {
        SimTime(self.0 + rhs.0)
    }
}

impl AddAssign for SimTime {
    fn add_assign(&mut self, rhs: SimTime) {
        self.0 += rhs.0;
    }
}

impl Sub for SimTime {
    type Output = SimTime;
    fn sub(self, rhs: SimTime) -> SimTime {
        SimTime(self.0 - rhs.0)
    }
}

impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}s", self.to_fixed9())
    }
}

/// Identifier of the entity an event is addressed to (node, link, endpoint).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EntityId(pub u32);

/// Coarse event tag, used for statistics and the trace digest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    PacketArrival,
    TransmitComplete,
    TimerExpiry,
    AppGenerate,
}

/// Implemented by event payloads so the kernel can tag them.
pub trait Payload {
    fn kind(&self) -> EventKind;
}

/// Cancellation handle returned by [`Kernel::schedule`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EventId(u64);

#[derive(Debug, Clone)]
pub struct Event<E> {
    pub fire_at: SimTime,
    pub seq: u64,
    pub target: EntityId,
    pub payload: E,
}

impl<E> Event<E> {
    pub fn id(&self) -> EventId {
        EventId(self.seq)
    }
}

impl<E> PartialEq for Event<E> {
    fn eq(&self, other: &Self) -> bool {
        self.fire_at == other.fire_at && self.seq == other.seq
    }
}

impl<E> Eq for Event<E> {}

impl<E> PartialOrd for Event<E> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<E> Ord for Event<E> {
    // Reversed so that `BinaryHeap` pops the earliest event first.
    fn cmp(&self, other: &Self) -> Ordering {
        (other.fire_at, other.seq).cmp(&(self.fire_at, self.seq))
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum KernelError {
    #[error("event scheduled in the past: fire_at={fire_at}, clock={now}")]
    ScheduledInPast { fire_at: SimTime, now: SimTime },
    #[error("livelock: more than {cap} consecutive events at {at}")]
    Livelock { at: SimTime, cap: u64 },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunStats {
    pub processed: u64,
    pub cancelled: u64,
    pub pending: u64,
    pub final_clock: SimTime,
}

/// Receives events from [`Kernel::run_until`].
pub trait Handler<E> {
    type Error: From<KernelError>;

    fn handle(&mut self, event: Event<E>, kernel: &mut Kernel<E>) -> Result<(), Self::Error>;
}

pub const DEFAULT_SAME_INSTANT_CAP: u64 = 1_000_000;

pub struct Kernel<E> {
    now: SimTime,
    next_seq: u64,
    heap: BinaryHeap<Event<E>>,
    cancelled: HashSet<u64>,
    scheduled: u64,
    processed: u64,
    cancelled_count: u64,
    same_instant_cap: u64,
    same_instant_run: u64,
    digest: DefaultHasher,
}

impl<E: Payload> Default for Kernel<E> {
    fn default() -> Self {
        Self::new()
    }
}

impl<E: Payload> Kernel<E> {
    pub fn new() -> Self {
        Kernel {
            now: SimTime::ZERO,
            next_seq: 0,
            heap: BinaryHeap::new(),
            cancelled: HashSet::new(),
            scheduled: 0,
            processed: 0,
            cancelled_count: 0,
            same_instant_cap: DEFAULT_SAME_INSTANT_CAP,
            same_instant_run: 0,
            digest: DefaultHasher::new(),
        }
    }

    pub fn with_same_instant_cap(mut self, cap: u64) -> Self {
        self.same_instant_cap = cap;
        self
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    pub fn schedule(
        &mut self,
        fire_at: SimTime,
        target: EntityId,
        payload: E,
    ) -> Result<EventId, KernelError> {
        if fire_at < self.now {
            return Err(KernelError::ScheduledInPast {
                fire_at,
                now: self.now,
            });
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        self.scheduled += 1;
        self.heap.push(Event {
            fire_at,
            seq,
            target,
            payload,
        });
        Ok(EventId(seq))
    }

    pub fn schedule_in(
        &mut self,
        delay: SimTime,
        target: EntityId,
        payload: E,
    ) -> Result<EventId, KernelError> {
        self.schedule(self.now + delay, target, payload)
    }

    /// Cancels a pending event. Returns false if it already fired or was
    /// cancelled before.
    pub fn cancel(&mut self, id: EventId) -> bool {
        if id.0 >= self.next_seq || !self.is_pending(id) {
            return false;
        }
        self.cancelled.insert(id.0);
        self.cancelled_count += 1;
        true
    }

    fn is_pending(&self, id: EventId) -> bool {
        !self.cancelled.contains(&id.0) && self.heap.iter().any(|e| e.seq == id.0)
    }

    /// Cancels without the pending check. The caller must know the event
    /// has not fired yet; used on hot paths such as timer re-arming.
    pub fn cancel_unchecked(&mut self, id: EventId) {
        if self.cancelled.insert(id.0) {
            self.cancelled_count += 1;
        }
    }

    pub fn pending(&self) -> u64 {
        self.heap.len() as u64 - self.cancelled.len() as u64
    }

    pub fn scheduled(&self) -> u64 {
        self.scheduled
    }

    /// Running digest over `(fire_at, seq, target, kind)` of every processed
    /// event.
    pub fn trace_digest(&self) -> u64 {
        self.digest.finish()
    }

    fn pop_due(&mut self, t_end: SimTime) -> Option<Event<E>> {
        loop {
            if self.heap.peek()?.fire_at > t_end {
                return None;
            }
            let ev = self.heap.pop()?;
            if self.cancelled.remove(&ev.seq) {
                continue;
            }
            return Some(ev);
        }
    }

    pub fn run_until<H>(&mut self, t_end: SimTime, handler: &mut H) -> Result<RunStats, H::Error>
    where
        H: Handler<E>,
    {
        while let Some(ev) = self.pop_due(t_end) {
            debug_assert!(ev.fire_at >= self.now);
            if ev.fire_at == self.now && self.processed > 0 {
                self.same_instant_run += 1;
                if self.same_instant_run > self.same_instant_cap {
                    return Err(KernelError::Livelock {
                        at: self.now,
                        cap: self.same_instant_cap,
                    }
                    .into());
                }
            } else {
                self.same_instant_run = 0;
            }
            self.now = ev.fire_at;
            self.processed += 1;
            self.digest.write_u64(ev.fire_at.as_nanos());
            self.digest.write_u64(ev.seq);
            self.digest.write_u32(ev.target.0);
            self.digest.write_u8(ev.payload.kind() as u8);
            handler.handle(ev, self)?;
        }
        if self.now < t_end {
            self.now = t_end;
        }
        Ok(self.stats())
    }

    pub fn stats(&self) -> RunStats {
        RunStats {
            processed: self.processed,
            cancelled: self.cancelled_count,
            pending: self.pending(),
            final_clock: self.now,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Debug, Clone, PartialEq)]
    struct Tag(u32);

    impl Payload for Tag {
        fn kind(&self) -> EventKind {
            EventKind::AppGenerate
        }
    }

    #[derive(Default)]
    struct Recorder {
        fired: Vec<(SimTime, u64, u32)>,
    }

    impl Handler<Tag> for Recorder {
        type Error = KernelError;

        fn handle(&mut self, ev: Event<Tag>, _k: &mut Kernel<Tag>) -> Result<(), KernelError> {
            self.fired.push((ev.fire_at, ev.seq, ev.payload.0));
            Ok(())
        }
    }

    const E: EntityId = EntityId(0);

    #[test]
    fn earlier_event_fires_first_regardless_of_schedule_order() {
        let mut k = Kernel::new();
        k.schedule(SimTime::from_secs(5), E, Tag(5)).unwrap();
        k.schedule(SimTime::from_secs(3), E, Tag(3)).unwrap();
        let mut r = Recorder::default();
        k.run_until(SimTime::from_secs(10), &mut r).unwrap();
        let tags: Vec<u32> = r.fired.iter().map(|f| f.2).collect();
        assert_eq!(tags, vec![3, 5]);
    }

    #[test]
    fn ties_break_by_sequence() {
        let mut k = Kernel::new();
        // Burn seqs 0..=9 so the tied pair gets seqs 10 and 11.
        for _ in 0..10 {
            let id = k.schedule(SimTime::from_secs(1), E, Tag(0)).unwrap();
            k.cancel(id);
        }
        let a = k.schedule(SimTime::from_secs(7), E, Tag(10)).unwrap();
        let b = k.schedule(SimTime::from_secs(7), E, Tag(11)).unwrap();
        assert_eq!((a, b), (EventId(10), EventId(11)));
        let mut r = Recorder::default();
        k.run_until(SimTime::from_secs(10), &mut r).unwrap();
        assert_eq!(r.fired, vec![
            (SimTime::from_secs(7), 10, 10),
            (SimTime::from_secs(7), 11, 11)
        ]);
    }

    #[test]
    fn cancelled_event_never_fires() {
        let mut k = Kernel::new();
        let id = k.schedule(SimTime::from_secs(1), E, Tag(1)).unwrap();
        k.schedule(SimTime::from_secs(2), E, Tag(2)).unwrap();
        assert!(k.cancel(id));
        assert!(!k.cancel(id));
        let mut r = Recorder::default();
        let stats = k.run_until(SimTime::from_secs(10), &mut r).unwrap();
        assert_eq!(r.fired.len(), 1);
        assert_eq!(r.fired[0].2, 2);
        assert_eq!(stats.cancelled, 1);
        assert_eq!(stats.processed, 1);
    }

    #[test]
    fn empty_queue_advances_clock_to_end() {
        let mut k: Kernel<Tag> = Kernel::new();
        let stats = k.run_until(SimTime::from_secs(1000), &mut Recorder::default()).unwrap();
        assert_eq!(stats.processed, 0);
        assert_eq!(stats.final_clock, SimTime::from_secs(1000));
    }

    #[test]
    fn run_until_stops_at_boundary() {
        let mut k = Kernel::new();
        for s in 1..=3 {
            k.schedule(SimTime::from_secs(s), E, Tag(s as u32)).unwrap();
        }
        let mut r = Recorder::default();
        let stats = k.run_until(SimTime::from_millis(2500), &mut r).unwrap();
        assert_eq!(stats.processed, 2);
        assert_eq!(stats.pending, 1);
        assert_eq!(stats.final_clock, SimTime::from_millis(2500));
        assert_eq!(k.scheduled(), stats.processed + stats.cancelled + stats.pending);
    }

    #[test]
    fn scheduling_in_the_past_is_an_error() {
        let mut k = Kernel::new();
        k.schedule(SimTime::from_secs(2), E, Tag(0)).unwrap();
        k.run_until(SimTime::from_secs(3), &mut Recorder::default()).unwrap();
        let err = k.schedule(SimTime::from_secs(1), E, Tag(0)).unwrap_err();
        assert!(matches!(err, KernelError::ScheduledInPast { .. }));
    }

    struct Looper;

    impl Handler<Tag> for Looper {
        type Error = KernelError;

        fn handle(&mut self, ev: Event<Tag>, k: &mut Kernel<Tag>) -> Result<(), KernelError> {
            k.schedule(ev.fire_at, ev.target, ev.payload)?;
            Ok(())
        }
    }

    #[test]
    fn zero_delay_loop_is_caught() {
        let mut k = Kernel::new().with_same_instant_cap(1000);
        k.schedule(SimTime::from_secs(1), E, Tag(0)).unwrap();
        let err = k.run_until(SimTime::from_secs(2), &mut Looper).unwrap_err();
        assert!(matches!(err, KernelError::Livelock { cap: 1000, .. }));
    }

    #[test]
    fn fixed9_round_trip() {
        let t = SimTime::from_nanos(1_023_437_500);
        assert_eq!(t.to_fixed9(), "1.023437500");
        assert_eq!(SimTime::parse_fixed9("1.023437500"), Some(t));
        assert_eq!(SimTime::parse_fixed9("800"), Some(SimTime::from_secs(800)));
        assert_eq!(SimTime::parse_fixed9("0.5"), Some(SimTime::from_millis(500)));
        assert_eq!(SimTime::parse_fixed9("x"), None);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn processed_times_are_monotone_and_nothing_is_lost(
                times in proptest::collection::vec(0u64..1_000, 1..200),
                cancel_mask in proptest::collection::vec(any::<bool>(), 200),
                horizon in 0u64..1_200,
            ) {
                let mut k = Kernel::new();
                let mut ids = Vec::new();
                for (i, t) in times.iter().enumerate() {
                    ids.push(k.schedule(SimTime::from_millis(*t), E, Tag(i as u32)).unwrap());
                }
                for (id, c) in ids.iter().zip(&cancel_mask) {
                    if *c {
                        k.cancel(*id);
                    }
                }
                let mut r = Recorder::default();
                let stats = k.run_until(SimTime::from_millis(horizon), &mut r).unwrap();
                for w in r.fired.windows(2) {
                    prop_assert!((w[0].0, w[0].1) < (w[1].0, w[1].1));
                }
                prop_assert_eq!(k.scheduled(), stats.processed + stats.cancelled + stats.pending);
            }
        }
    }
}
