//! On-demand routing agents.
//!
//! An agent is a per-node state machine. The simulation feeds it packets and
//! timer expirations and carries out the [`Action`]s it returns; agents never
//! touch the medium or the clock directly.

pub mod aodv;
pub mod dsr;

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use crate::medium::LinkMode;
use crate::packet::{NodeId, Packet};
use crate::sim::SimTime;

pub use aodv::{AodvAgent, AodvRouteEntry};
pub use dsr::{CachedPath, DsrAgent, DsrRouteCache};

#[derive(Debug, Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Protocol {
    Aodv,
    Dsr,
}

impl Protocol {
    pub const ALL: [Protocol; 2] = [Protocol::Aodv, Protocol::Dsr];

    pub fn as_str(self) -> &'static str {
        match self {
            Protocol::Aodv => "aodv",
            Protocol::Dsr => "dsr",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Protocol::Aodv => "AODV",
            Protocol::Dsr => "DSR",
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Protocol {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "aodv" => Ok(Protocol::Aodv),
            "dsr" => Ok(Protocol::Dsr),
            _ => Err(format!("unknown protocol {s:?} (expected aodv or dsr)")),
        }
    }
}

/// Knobs shared by both agents.
#[derive(Debug, Clone, PartialEq)]
pub struct RoutingParams {
    /// Idle lifetime of an AODV route entry.
    pub active_route_timeout: SimTime,
    /// Route request retransmissions after the first attempt.
    pub rreq_retries: u32,
    /// First discovery timeout; doubles with every retry.
    pub discovery_backoff: SimTime,
    /// Packets held per node while waiting for a route.
    pub send_buffer: usize,
    pub rreq_ttl: u32,
    /// DSR intermediate nodes answer requests from their cache.
    pub cache_replies: bool,
}

impl Default for RoutingParams {
    fn default() -> Self {
        RoutingParams {
            active_route_timeout: SimTime::from_secs(10),
            rreq_retries: 3,
            discovery_backoff: SimTime::from_secs(1),
            send_buffer: 64,
            rreq_ttl: 30,
            cache_replies: true,
        }
    }
}

#[derive(Debug, Copy, Clone, PartialEq, Eq)]
pub enum DropReason {
    NoRoute,
    TtlExpired,
    BufferOverflow,
    DiscoveryFailed,
    LinkBroken,
    NoReverseRoute,
    NotOnRoute,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RoutingTimer {
    /// Fires when a route request has gone unanswered.
    Discovery { dest: NodeId, attempt: u32 },
}

#[derive(Debug, Clone)]
pub enum Action {
    Send {
        packet: Packet,
        mode: LinkMode,
    },
    /// Hand to the local transport agent.
    Deliver(Packet),
    Drop {
        packet: Packet,
        reason: DropReason,
    },
    Timer {
        after: SimTime,
        timer: RoutingTimer,
    },
}

/// Per-call context: the clock and the global packet-uid source.
pub struct AgentCtx<'a> {
    pub now: SimTime,
    next_uid: &'a mut u64,
}

impl<'a> AgentCtx<'a> {
    pub fn new(now: SimTime, next_uid: &'a mut u64) -> Self {
        AgentCtx { now, next_uid }
    }

    pub fn fresh_uid(&mut self) -> u64 {
        let uid = *self.next_uid;
        *self.next_uid += 1;
        uid
    }
}

pub trait RoutingAgent {
    fn node(&self) -> NodeId;

    /// A transport packet created at this node.
    fn originate(&mut self, ctx: &mut AgentCtx<'_>, packet: Packet) -> Vec<Action>;

    /// A frame received from neighbor `from`.
    fn receive(&mut self, ctx: &mut AgentCtx<'_>, from: NodeId, packet: Packet) -> Vec<Action>;

    /// The medium could not deliver `packet` to `next_hop`.
    fn link_failed(&mut self, ctx: &mut AgentCtx<'_>, next_hop: NodeId, packet: Packet) -> Vec<Action>;

    fn timer(&mut self, ctx: &mut AgentCtx<'_>, timer: RoutingTimer) -> Vec<Action>;
}

/// Either agent, so callers can inspect protocol state after a run.
pub enum Router {
    Aodv(AodvAgent),
    Dsr(DsrAgent),
}

impl Router {
    pub fn new(protocol: Protocol, node: NodeId, params: RoutingParams) -> Self {
        match protocol {
            Protocol::Aodv => Router::Aodv(AodvAgent::new(node, params)),
            Protocol::Dsr => Router::Dsr(DsrAgent::new(node, params)),
        }
    }

    pub fn as_aodv(&self) -> Option<&AodvAgent> {
        match self {
            Router::Aodv(a) => Some(a),
            Router::Dsr(_) => None,
        }
    }

    pub fn as_dsr(&self) -> Option<&DsrAgent> {
        match self {
            Router::Dsr(d) => Some(d),
            Router::Aodv(_) => None,
        }
    }

    fn agent(&mut self) -> &mut dyn RoutingAgent {
        match self {
            Router::Aodv(a) => a,
            Router::Dsr(d) => d,
        }
    }
}

impl RoutingAgent for Router {
    fn node(&self) -> NodeId {
        match self {
            Router::Aodv(a) => a.node(),
            Router::Dsr(d) => d.node(),
        }
    }

    fn originate(&mut self, ctx: &mut AgentCtx<'_>, packet: Packet) -> Vec<Action> {
        self.agent().originate(ctx, packet)
    }

    fn receive(&mut self, ctx: &mut AgentCtx<'_>, from: NodeId, packet: Packet) -> Vec<Action> {
        self.agent().receive(ctx, from, packet)
    }

    fn link_failed(&mut self, ctx: &mut AgentCtx<'_>, next_hop: NodeId, packet: Packet) -> Vec<Action> {
        self.agent().link_failed(ctx, next_hop, packet)
    }

    fn timer(&mut self, ctx: &mut AgentCtx<'_>, timer: RoutingTimer) -> Vec<Action> {
        self.agent().timer(ctx, timer)
    }
}

/// Bounded buffer of packets waiting for a route; overflow evicts the oldest.
#[derive(Debug, Default)]
pub(crate) struct SendBuffer {
    packets: VecDeque<Packet>,
    capacity: usize,
}

impl SendBuffer {
    pub(crate) fn new(capacity: usize) -> Self {
        SendBuffer {
            packets: VecDeque::new(),
            capacity,
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.packets.len()
    }

    pub(crate) fn push(&mut self, packet: Packet, out: &mut Vec<Action>) {
        if self.capacity == 0 {
            out.push(Action::Drop {
                packet,
                reason: DropReason::BufferOverflow,
            });
            return;
        }
        if self.packets.len() == self.capacity {
            let oldest = self.packets.pop_front().expect("full buffer");
            out.push(Action::Drop {
                packet: oldest,
                reason: DropReason::BufferOverflow,
            });
        }
        self.packets.push_back(packet);
    }

    /// Removes and returns, in arrival order, every packet for which `pick` holds.
    pub(crate) fn take_where(&mut self, mut pick: impl FnMut(&Packet) -> bool) -> Vec<Packet> {
        let mut taken = Vec::new();
        let mut kept = VecDeque::with_capacity(self.packets.len());
        for p in self.packets.drain(..) {
            if pick(&p) {
                taken.push(p);
            } else {
                kept.push_back(p);
            }
        }
        self.packets = kept;
        taken
    }

    pub(crate) fn take_for(&mut self, dest: NodeId) -> Vec<Packet> {
        self.take_where(|p| p.flow.dst == dest)
    }
}

/// Outstanding route discoveries: destination -> current attempt number.
#[derive(Debug, Default)]
pub(crate) struct Discoveries {
    pending: BTreeMap<NodeId, u32>,
}

impl Discoveries {
    pub(crate) fn is_pending(&self, dest: NodeId) -> bool {
        self.pending.contains_key(&dest)
    }

    pub(crate) fn begin(&mut self, dest: NodeId, attempt: u32) {
        self.pending.insert(dest, attempt);
    }

    pub(crate) fn finish(&mut self, dest: NodeId) {
        self.pending.remove(&dest);
    }

    /// True if `attempt` is still the live attempt for `dest`.
    pub(crate) fn is_current(&self, dest: NodeId, attempt: u32) -> bool {
        self.pending.get(&dest) == Some(&attempt)
    }

    pub(crate) fn timeout_for(params: &RoutingParams, attempt: u32) -> SimTime {
        SimTime::from_micros(params.discovery_backoff.as_micros() << attempt.min(16))
    }
}

/// Common handling of a discovery timer: retry with backoff or give up and
/// drop whatever was waiting. Returns `Some(attempt)` when the caller should
/// re-issue the request.
pub(crate) fn discovery_timeout(
    params: &RoutingParams,
    discoveries: &mut Discoveries,
    buffer: &mut SendBuffer,
    dest: NodeId,
    attempt: u32,
    out: &mut Vec<Action>,
) -> Option<u32> {
    if !discoveries.is_current(dest, attempt) {
        return None;
    }
    if attempt < params.rreq_retries {
        return Some(attempt + 1);
    }
    discoveries.finish(dest);
    for packet in buffer.take_for(dest) {
        out.push(Action::Drop {
            packet,
            reason: DropReason::DiscoveryFailed,
        });
    }
    None
}
