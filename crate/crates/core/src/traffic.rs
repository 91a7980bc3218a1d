//! Application and transport agents.
//!
//! CBR sources emit fixed-size datagrams on a fixed period and never expect
//! an acknowledgement. The reliable transport is a Tahoe-like sender:
//! cumulative acks, slow start and congestion avoidance, a retransmission
//! timer with exponential backoff, go-back-N recovery on timeout, and no
//! fast retransmit.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::packet::{FlowId, NodeId, PacketKind};
use crate::sim::{RngStream, SimTime};

#[derive(Debug, Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TrafficKind {
    Cbr,
    Tcp,
}

impl TrafficKind {
    pub const ALL: [TrafficKind; 2] = [TrafficKind::Cbr, TrafficKind::Tcp];

    pub fn as_str(self) -> &'static str {
        match self {
            TrafficKind::Cbr => "cbr",
            TrafficKind::Tcp => "tcp",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            TrafficKind::Cbr => "CBR",
            TrafficKind::Tcp => "TCP",
        }
    }

    /// Packet type carrying this traffic's payload.
    pub fn data_kind(self) -> PacketKind {
        match self {
            TrafficKind::Cbr => PacketKind::Cbr,
            TrafficKind::Tcp => PacketKind::Tcp,
        }
    }
}

impl fmt::Display for TrafficKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TrafficKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "cbr" => Ok(TrafficKind::Cbr),
            "tcp" => Ok(TrafficKind::Tcp),
            _ => Err(format!("unknown traffic type {s:?} (expected cbr or tcp)")),
        }
    }
}

/// Traffic shaping constants shared by all flows of a scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct TrafficParams {
    pub cbr_size: u32,
    pub cbr_interval: SimTime,
    pub tcp_segment: u32,
    /// Period at which the application hands the transport a new segment;
    /// zero means an unlimited backlog (bulk transfer).
    pub tcp_interval: SimTime,
    pub ack_size: u32,
    /// Flow start times are drawn uniformly from `[0, start_window)`.
    pub start_window: SimTime,
    /// Sources go quiet this long before the end of the run.
    pub stop_margin: SimTime,
    pub reliable: ReliableConfig,
}

impl Default for TrafficParams {
    fn default() -> Self {
        TrafficParams {
            cbr_size: 512,
            cbr_interval: SimTime::from_millis(250),
            tcp_segment: 1040,
            tcp_interval: SimTime::from_millis(250),
            ack_size: 40,
            start_window: SimTime::from_secs(10),
            stop_margin: SimTime::from_secs(1),
            reliable: ReliableConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowSpec {
    /// Position in the scenario's flow list; also used as both port numbers.
    pub index: usize,
    pub src: NodeId,
    pub dst: NodeId,
    pub src_port: u16,
    pub dst_port: u16,
    pub kind: TrafficKind,
    pub start_at: SimTime,
    pub stop_at: SimTime,
    /// Datagram or segment payload in bytes.
    pub size: u32,
    /// Emission period; zero only for bulk reliable transfer.
    pub interval: SimTime,
}

impl FlowSpec {
    pub fn id(&self) -> FlowId {
        FlowId::new(self.src, self.dst, self.src_port, self.dst_port)
    }

    /// Emission times `start + k * interval` strictly before `stop`.
    pub fn emission_times(&self) -> impl Iterator<Item = SimTime> + '_ {
        let step = self.interval.as_micros();
        assert!(step > 0, "periodic flow needs a positive interval");
        (0u64..)
            .map(move |k| SimTime::from_micros(self.start_at.as_micros() + k * step))
            .take_while(move |&t| t < self.stop_at)
    }
}

/// Draws `connections` distinct ordered (src, dst) pairs with staggered
/// starts. Flow `i` uses port `i` at both ends.
pub fn generate_flows(
    nodes: usize,
    connections: usize,
    kind: TrafficKind,
    params: &TrafficParams,
    end: SimTime,
    rng: &mut RngStream,
) -> Vec<FlowSpec> {
    assert!(nodes >= 2, "flows need at least two nodes");
    assert!(
        connections <= nodes * (nodes - 1),
        "more connections than distinct node pairs"
    );
    let stop_at = end.saturating_sub(params.stop_margin);
    let window = params.start_window.min(stop_at).as_secs_f64();
    let mut used = BTreeSet::new();
    let mut flows = Vec::with_capacity(connections);
    while flows.len() < connections {
        let src = rng.below(nodes as u64) as NodeId;
        let dst = rng.below(nodes as u64) as NodeId;
        if src == dst || !used.insert((src, dst)) {
            continue;
        }
        let index = flows.len();
        let start_at = SimTime::from_secs_f64(rng.uniform(0.0, window)).min(stop_at);
        let (size, interval) = match kind {
            TrafficKind::Cbr => (params.cbr_size, params.cbr_interval),
            TrafficKind::Tcp => (params.tcp_segment, params.tcp_interval),
        };
        flows.push(FlowSpec {
            index,
            src,
            dst,
            src_port: index as u16,
            dst_port: index as u16,
            kind,
            start_at,
            stop_at,
            size,
            interval,
        });
    }
    flows
}

/// Fixed-rate datagram source.
#[derive(Debug, Clone)]
pub struct CbrSource {
    next_seq: u64,
}

impl CbrSource {
    pub fn new() -> Self {
        CbrSource { next_seq: 0 }
    }

    /// Emits the next datagram at `now`: its seqno, and the next emission
    /// time if that still falls before the flow stops.
    pub fn emit(&mut self, flow: &FlowSpec, now: SimTime) -> (u64, Option<SimTime>) {
        let seq = self.next_seq;
        self.next_seq += 1;
        let next = SimTime::from_micros(flow.start_at.as_micros() + self.next_seq * flow.interval.as_micros());
        debug_assert_eq!(
            now.as_micros(),
            flow.start_at.as_micros() + seq * flow.interval.as_micros()
        );
        (seq, (next < flow.stop_at).then_some(next))
    }

    pub fn emitted(&self) -> u64 {
        self.next_seq
    }
}

impl Default for CbrSource {
    fn default() -> Self {
        Self::new()
    }
}

/// Receiver side of a CBR flow: one delivery per distinct seqno.
#[derive(Debug, Default, Clone)]
pub struct DatagramSink {
    seen: BTreeSet<u64>,
}

impl DatagramSink {
    /// True the first time `seq` arrives.
    pub fn accept(&mut self, seq: u64) -> bool {
        self.seen.insert(seq)
    }

    pub fn received(&self) -> usize {
        self.seen.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReliableConfig {
    pub initial_cwnd: f64,
    pub initial_ssthresh: f64,
    pub initial_rto: SimTime,
    pub min_rto: SimTime,
    pub max_rto: SimTime,
    /// Timeouts tolerated on one segment before the flow gives up.
    pub max_retries: u32,
}

impl Default for ReliableConfig {
    fn default() -> Self {
        ReliableConfig {
            initial_cwnd: 1.0,
            initial_ssthresh: 32.0,
            initial_rto: SimTime::from_secs(3),
            min_rto: SimTime::from_millis(200),
            max_rto: SimTime::from_secs(64),
            max_retries: 12,
        }
    }
}

/// A segment the sender wants on the wire.
#[derive(Debug, Copy, Clone, PartialEq, Eq)]
pub struct Segment {
    pub seq: u64,
    /// First transmission of this seqno (the only one the agent traces).
    pub first: bool,
}

/// What the caller must do after feeding the sender an input.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SenderOutput {
    pub segments: Vec<Segment>,
    /// Arm the retransmission timer: fire at this time with this generation.
    pub timer: Option<(SimTime, u64)>,
}

#[derive(Debug, Clone)]
pub struct ReliableSender {
    config: ReliableConfig,
    cwnd: f64,
    ssthresh: f64,
    /// Lowest unacknowledged seqno (the highest cumulative ack seen).
    snd_una: u64,
    snd_nxt: u64,
    /// One past the highest seqno ever transmitted.
    high_water: u64,
    /// Segments the application has handed over so far.
    available: u64,
    rto: SimTime,
    srtt: Option<f64>,
    rttvar: f64,
    retries: u32,
    timer_gen: u64,
    timer_armed: bool,
    /// First-transmission time per in-flight seqno; `None` once retransmitted.
    sent_at: BTreeMap<u64, Option<SimTime>>,
    dup_acks: u64,
    aborted: bool,
}

impl ReliableSender {
    pub fn new(config: ReliableConfig) -> Self {
        ReliableSender {
            cwnd: config.initial_cwnd.max(1.0),
            ssthresh: config.initial_ssthresh,
            rto: config.initial_rto,
            config,
            snd_una: 0,
            snd_nxt: 0,
            high_water: 0,
            available: 0,
            srtt: None,
            rttvar: 0.0,
            retries: 0,
            timer_gen: 0,
            timer_armed: false,
            sent_at: BTreeMap::new(),
            dup_acks: 0,
            aborted: false,
        }
    }

    pub fn cwnd(&self) -> f64 {
        self.cwnd
    }

    pub fn ssthresh(&self) -> f64 {
        self.ssthresh
    }

    pub fn rto(&self) -> SimTime {
        self.rto
    }

    pub fn srtt(&self) -> Option<f64> {
        self.srtt
    }

    pub fn rttvar(&self) -> f64 {
        self.rttvar
    }

    pub fn highest_acked(&self) -> u64 {
        self.snd_una
    }

    pub fn next_seq(&self) -> u64 {
        self.snd_nxt
    }

    pub fn in_flight(&self) -> u64 {
        self.snd_nxt - self.snd_una
    }

    pub fn dup_acks(&self) -> u64 {
        self.dup_acks
    }

    pub fn is_aborted(&self) -> bool {
        self.aborted
    }

    /// Makes `n` more segments available to send.
    pub fn app_write(&mut self, n: u64) {
        self.available = self.available.saturating_add(n);
    }

    /// No new data after this; outstanding segments are still recovered.
    pub fn close(&mut self) {
        self.available = self.available.min(self.high_water);
    }

    /// Sends as much as the window and the backlog allow.
    pub fn pump(&mut self, now: SimTime) -> SenderOutput {
        let mut out = SenderOutput::default();
        if self.aborted {
            return out;
        }
        let window = self.cwnd.floor() as u64;
        while self.snd_nxt < self.available && self.snd_nxt - self.snd_una < window {
            let seq = self.snd_nxt;
            let first = seq >= self.high_water;
            if first {
                self.high_water = seq + 1;
                self.sent_at.insert(seq, Some(now));
            } else {
                self.sent_at.insert(seq, None);
            }
            out.segments.push(Segment { seq, first });
            self.snd_nxt += 1;
        }
        if !self.timer_armed && self.snd_una < self.snd_nxt {
            out.timer = Some(self.arm(now));
        }
        out
    }

    fn arm(&mut self, now: SimTime) -> (SimTime, u64) {
        self.timer_gen += 1;
        self.timer_armed = true;
        (now + self.rto, self.timer_gen)
    }

    fn sample_rtt(&mut self, r: f64) {
        match self.srtt {
            None => {
                self.srtt = Some(r);
                self.rttvar = r / 2.0;
            }
            Some(srtt) => {
                self.rttvar = 0.75 * self.rttvar + 0.25 * (srtt - r).abs();
                self.srtt = Some(0.875 * srtt + 0.125 * r);
            }
        }
        let rto = self.srtt.unwrap_or(r) + 4.0 * self.rttvar;
        self.rto = SimTime::from_secs_f64(rto).clamp(self.config.min_rto, self.config.max_rto);
    }

    /// Handles a cumulative ack (`ackno` = next seqno the receiver expects).
    pub fn on_ack(&mut self, ackno: u64, now: SimTime) -> SenderOutput {
        if self.aborted || ackno <= self.snd_una || ackno > self.high_water {
            self.dup_acks += 1;
            return SenderOutput::default();
        }
        // Karn: only segments sent exactly once give a usable sample.
        if let Some(Some(sent)) = self.sent_at.get(&(ackno - 1)) {
            self.sample_rtt((now - *sent).as_secs_f64());
        }
        self.sent_at = self.sent_at.split_off(&ackno);
        self.snd_una = ackno;
        self.snd_nxt = self.snd_nxt.max(ackno);
        self.retries = 0;
        if self.cwnd < self.ssthresh {
            self.cwnd += 1.0;
        } else {
            self.cwnd += 1.0 / self.cwnd;
        }
        // restart the timer for whatever is still outstanding
        self.timer_armed = false;
        self.pump(now)
    }

    /// Handles expiry of the retransmission timer armed with generation `gen`.
    /// Stale generations are ignored.
    pub fn on_timeout(&mut self, gen: u64, now: SimTime) -> SenderOutput {
        if self.aborted || !self.timer_armed || gen != self.timer_gen {
            return SenderOutput::default();
        }
        self.timer_armed = false;
        if self.snd_una >= self.snd_nxt {
            return SenderOutput::default();
        }
        self.retries += 1;
        if self.retries > self.config.max_retries {
            self.aborted = true;
            return SenderOutput::default();
        }
        self.ssthresh = (self.cwnd / 2.0).max(2.0);
        self.cwnd = 1.0;
        self.rto = (self.rto + self.rto).min(self.config.max_rto);
        self.snd_nxt = self.snd_una;
        self.pump(now)
    }
}

/// Receiver side of the reliable transport: in-order delivery with
/// out-of-order buffering and cumulative acks.
#[derive(Debug, Default, Clone)]
pub struct ReliableReceiver {
    expected: u64,
    held: BTreeSet<u64>,
}

impl ReliableReceiver {
    /// Accepts a segment. Returns the seqnos newly delivered in order and the
    /// ack number to send back.
    pub fn on_segment(&mut self, seq: u64) -> (Vec<u64>, u64) {
        let mut delivered = Vec::new();
        if seq == self.expected {
            delivered.push(seq);
            self.expected += 1;
            while self.held.remove(&self.expected) {
                delivered.push(self.expected);
                self.expected += 1;
            }
        } else if seq > self.expected {
            self.held.insert(seq);
        }
        (delivered, self.expected)
    }

    pub fn expected(&self) -> u64 {
        self.expected
    }
}
