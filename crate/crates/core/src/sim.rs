//! Discrete-event engine: integer-microsecond clock, a cancellable event
//! queue ordered by `(fire_at, seq)`, and named deterministic RNG streams.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};
use std::fmt;

use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::SimError;
use crate::packet::NodeId;

/// Simulation timestamp in integer microseconds.
#[derive(Debug, Copy, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SimTime(u64);

impl SimTime {
    pub const ZERO: SimTime = SimTime(0);
    pub const MICROS_PER_SEC: u64 = 1_000_000;

    pub const fn from_micros(us: u64) -> Self {
        SimTime(us)
    }

    pub const fn from_millis(ms: u64) -> Self {
        SimTime(ms * 1_000)
    }

    pub const fn from_secs(s: u64) -> Self {
        SimTime(s * Self::MICROS_PER_SEC)
    }

    /// Rounds to the nearest microsecond. Negative and NaN inputs clamp to zero.
    pub fn from_secs_f64(s: f64) -> Self {
        if s.is_nan() || s <= 0.0 {
            return SimTime(0);
        }
        SimTime((s * Self::MICROS_PER_SEC as f64).round() as u64)
    }

    pub const fn as_micros(self) -> u64 {
        self.0
    }

    pub fn as_secs_f64(self) -> f64 {
        self.0 as f64 / Self::MICROS_PER_SEC as f64
    }

    pub const fn saturating_add(self, other: SimTime) -> SimTime {
        SimTime(self.0.saturating_add(other.0))
    }

    pub const fn saturating_sub(self, other: SimTime) -> SimTime {
        SimTime(self.0.saturating_sub(other.0))
    }
}

impl std::ops::Add for SimTime {
    type Output = SimTime;
    fn add(self, rhs: SimTime) -> SimTime {
        SimTime(self.0 + rhs.0)
    }
}

impl std::ops::Sub for SimTime {
    type Output = SimTime;
    fn sub(self, rhs: SimTime) -> SimTime {
        SimTime(self.0 - rhs.0)
    }
}

/// Seconds with nine decimals, the trace-file rendering.
impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let secs = self.0 / Self::MICROS_PER_SEC;
        let frac_ns = (self.0 % Self::MICROS_PER_SEC) * 1_000;
        write!(f, "{secs}.{frac_ns:09}")
    }
}

/// Who an event is addressed to.
#[derive(Debug, Copy, Clone, PartialEq, Eq)]
pub enum Target {
    Node(NodeId),
    Global,
}

#[derive(Debug, Clone)]
pub struct Event<E> {
    pub fire_at: SimTime,
    pub seq: u64,
    pub target: Target,
    pub payload: E,
}

/// Opaque handle returned by [`Scheduler::schedule`], usable for cancellation.
#[derive(Debug, Copy, Clone, PartialEq, Eq, Hash)]
pub struct EventHandle(u64);

struct Queued<E>(Event<E>);

impl<E> PartialEq for Queued<E> {
    fn eq(&self, other: &Self) -> bool {
        self.0.seq == other.0.seq
    }
}

impl<E> Eq for Queued<E> {}

impl<E> PartialOrd for Queued<E> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// BinaryHeap is a max-heap; invert so the smallest (fire_at, seq) pops first.
impl<E> Ord for Queued<E> {
    fn cmp(&self, other: &Self) -> Ordering {
        (other.0.fire_at, other.0.seq).cmp(&(self.0.fire_at, self.0.seq))
    }
}

/// Event queue plus virtual clock.
pub struct Scheduler<E> {
    now: SimTime,
    next_seq: u64,
    heap: BinaryHeap<Queued<E>>,
    cancelled: HashSet<u64>,
}

impl<E> Default for Scheduler<E> {
    fn default() -> Self {
        Self::new()
    }
}

impl<E> Scheduler<E> {
    pub fn new() -> Self {
        Scheduler {
            now: SimTime::ZERO,
            next_seq: 0,
            heap: BinaryHeap::new(),
            cancelled: HashSet::new(),
        }
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    pub fn pending(&self) -> usize {
        self.heap.len() - self.cancelled.len()
    }

    /// Enqueue `payload` to fire at `fire_at`. Scheduling before the current
    /// clock is rejected.
    pub fn schedule(&mut self, fire_at: SimTime, target: Target, payload: E) -> Result<EventHandle, SimError> {
        if fire_at < self.now {
            return Err(SimError::ScheduleInPast { fire_at, now: self.now });
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Queued(Event {
            fire_at,
            seq,
            target,
            payload,
        }));
        Ok(EventHandle(seq))
    }

    pub fn schedule_in(&mut self, delay: SimTime, target: Target, payload: E) -> Result<EventHandle, SimError> {
        self.schedule(self.now + delay, target, payload)
    }

    /// Returns false if the event already fired or was already cancelled.
    pub fn cancel(&mut self, handle: EventHandle) -> bool {
        if handle.0 >= self.next_seq {
            return false;
        }
        let still_queued = self.heap.iter().any(|q| q.0.seq == handle.0);
        still_queued && self.cancelled.insert(handle.0)
    }

    /// Pops the next live event with `fire_at <= until`, advancing the clock to it.
    pub fn pop_due(&mut self, until: SimTime) -> Option<Event<E>> {
        loop {
            let head = self.heap.peek()?;
            if head.0.fire_at > until {
                return None;
            }
            let Queued(event) = self.heap.pop().expect("peeked");
            if self.cancelled.remove(&event.seq) {
                continue;
            }
            debug_assert!(event.fire_at >= self.now);
            self.now = event.fire_at;
            return Some(event);
        }
    }

    /// Moves the clock forward to `until` once no due events remain.
    pub fn advance_to(&mut self, until: SimTime) {
        if until > self.now {
            self.now = until;
        }
    }

    /// Dispatches every event due by `until` in `(fire_at, seq)` order and
    /// leaves the clock at `until`. Returns the number of dispatched events.
    pub fn run<F>(&mut self, until: SimTime, mut handler: F) -> u64
    where
        F: FnMut(&mut Self, Event<E>),
    {
        let mut dispatched = 0;
        while let Some(event) = self.pop_due(until) {
            handler(self, event);
            dispatched += 1;
        }
        self.advance_to(until);
        dispatched
    }
}

/// The independent randomness concerns of a scenario.
#[derive(Debug, Copy, Clone, PartialEq, Eq, Hash)]
pub enum StreamLabel {
    Mobility,
    Traffic,
    Jitter,
    Topology,
}

impl StreamLabel {
    fn stream_id(self) -> u64 {
        match self {
            StreamLabel::Mobility => 1,
            StreamLabel::Traffic => 2,
            StreamLabel::Jitter => 3,
            StreamLabel::Topology => 4,
        }
    }
}

/// A seeded ChaCha stream; `(seed, label)` fixes the whole sequence.
#[derive(Clone)]
pub struct RngStream {
    label: StreamLabel,
    rng: ChaCha12Rng,
}

impl RngStream {
    pub fn new(seed: u64, label: StreamLabel) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(label.stream_id());
        RngStream { label, rng }
    }

    pub fn label(&self) -> StreamLabel {
        self.label
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    pub fn next_unit(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`; returns `lo` when `lo == hi`.
    ///
    /// Panics if `lo > hi`; callers validate their intervals up front.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        assert!(lo <= hi, "rng_uniform: empty interval [{lo}, {hi})");
        if lo == hi {
            return lo;
        }
        let v = lo + (hi - lo) * self.next_unit();
        // rounding can land exactly on `hi`
        if v >= hi {
            lo.max(hi - (hi - lo) * f64::EPSILON)
        } else {
            v
        }
    }

    /// Uniform integer in `[0, n)`.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "below(0)");
        // Lemire-style rejection keeps the distribution exact.
        let zone = u64::MAX - (u64::MAX % n);
        loop {
            let v = self.rng.next_u64();
            if v < zone {
                return v % n;
            }
        }
    }

    pub fn chance(&mut self, p: f64) -> bool {
        p > 0.0 && self.next_unit() < p
    }
}
