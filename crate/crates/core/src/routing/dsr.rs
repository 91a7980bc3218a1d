//! Dynamic Source Routing agent.
//!
//! Route requests accumulate the traversed node list; the target (or an
//! intermediate node with a cached path, when enabled) returns the complete
//! route by source-routing a reply back along the reversed record. Data
//! packets carry the full node list and every hop forwards to its successor.
//! A broken link purges cached paths that use it and is reported to the
//! packet's source with a source-routed RERR. No salvaging, no promiscuous
//! snooping, and paths stay cached until a RERR removes them.

use std::collections::HashSet;

use super::{
    discovery_timeout, Action, AgentCtx, Discoveries, DropReason, RoutingAgent, RoutingParams, RoutingTimer, SendBuffer,
};
use crate::medium::LinkMode;
use crate::packet::{is_simple_path, source_routed_size, Control, FlowId, NodeId, Packet, PacketKind};
use crate::sim::SimTime;

const RREQ_FIXED_BYTES: u32 = 8;
const RREP_FIXED_BYTES: u32 = 8;
const RERR_FIXED_BYTES: u32 = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct CachedPath {
    /// Starts at the owning node.
    pub path: Vec<NodeId>,
    pub learned_at: SimTime,
    /// Insertion counter, breaks ties between equal `learned_at`.
    order: u64,
}

/// Multi-path route cache. Every path starts at the owner; any node on a path
/// is reachable through the path's prefix ending at it.
#[derive(Debug, Clone)]
pub struct DsrRouteCache {
    owner: NodeId,
    paths: Vec<CachedPath>,
    counter: u64,
}

impl DsrRouteCache {
    pub fn new(owner: NodeId) -> Self {
        DsrRouteCache {
            owner,
            paths: Vec::new(),
            counter: 0,
        }
    }

    pub fn paths(&self) -> &[CachedPath] {
        &self.paths
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    /// Adds a path (refreshing it if already present). Paths that do not
    /// start at the owner, are shorter than one hop, or revisit a node are
    /// rejected.
    pub fn add(&mut self, path: Vec<NodeId>, now: SimTime) -> bool {
        if path.len() < 2 || path[0] != self.owner || !is_simple_path(&path) {
            return false;
        }
        self.counter += 1;
        if let Some(existing) = self.paths.iter_mut().find(|p| p.path == path) {
            existing.learned_at = now;
            existing.order = self.counter;
        } else {
            self.paths.push(CachedPath {
                path,
                learned_at: now,
                order: self.counter,
            });
        }
        true
    }

    /// Shortest cached route to `dest`; ties go to the most recently learned.
    pub fn route_to(&self, dest: NodeId) -> Option<Vec<NodeId>> {
        self.paths
            .iter()
            .filter_map(|p| {
                let idx = p.path.iter().skip(1).position(|&n| n == dest)? + 1;
                Some((idx, p.learned_at, p.order, &p.path[..=idx]))
            })
            .min_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)).then(b.2.cmp(&a.2)))
            .map(|(_, _, _, route)| route.to_vec())
    }

    /// Removes every path that traverses `from -> to`. Returns how many went.
    pub fn remove_link(&mut self, from: NodeId, to: NodeId) -> usize {
        let before = self.paths.len();
        self.paths
            .retain(|p| !p.path.windows(2).any(|w| w[0] == from && w[1] == to));
        before - self.paths.len()
    }
}

pub struct DsrAgent {
    node: NodeId,
    params: RoutingParams,
    cache: DsrRouteCache,
    seen: HashSet<(NodeId, u32)>,
    next_request_id: u32,
    buffer: SendBuffer,
    discoveries: Discoveries,
}

impl DsrAgent {
    pub fn new(node: NodeId, params: RoutingParams) -> Self {
        DsrAgent {
            node,
            cache: DsrRouteCache::new(node),
            seen: HashSet::new(),
            next_request_id: 0,
            buffer: SendBuffer::new(params.send_buffer),
            params,
            discoveries: Discoveries::default(),
        }
    }

    pub fn cache(&self) -> &DsrRouteCache {
        &self.cache
    }

    pub fn cache_mut(&mut self) -> &mut DsrRouteCache {
        &mut self.cache
    }

    pub fn buffered(&self) -> usize {
        self.buffer.len()
    }

    pub fn discovery_pending(&self, dest: NodeId) -> bool {
        self.discoveries.is_pending(dest)
    }

    fn start_discovery(&mut self, ctx: &mut AgentCtx<'_>, target: NodeId, attempt: u32, out: &mut Vec<Action>) {
        self.next_request_id += 1;
        let request_id = self.next_request_id;
        self.seen.insert((self.node, request_id));
        let record = vec![self.node];
        let mut rreq = Packet::new(
            ctx.fresh_uid(),
            FlowId::control(self.node, target),
            request_id as u64,
            PacketKind::Rreq,
            0,
        );
        rreq.size = source_routed_size(RREQ_FIXED_BYTES, record.len());
        rreq.ttl = self.params.rreq_ttl;
        rreq.rreq_record = Some(record);
        rreq.control = Some(Control::DsrRreq {
            originator: self.node,
            target,
            request_id,
        });
        self.discoveries.begin(target, attempt);
        out.push(Action::Send {
            packet: rreq,
            mode: LinkMode::Broadcast,
        });
        out.push(Action::Timer {
            after: Discoveries::timeout_for(&self.params, attempt),
            timer: RoutingTimer::Discovery { dest: target, attempt },
        });
    }

    /// Stamps the cached route and sends, or returns the packet if no route.
    fn send_with_cache(&mut self, mut packet: Packet, out: &mut Vec<Action>) -> Option<Packet> {
        let Some(route) = self.cache.route_to(packet.flow.dst) else {
            return Some(packet);
        };
        packet.size = source_routed_size(packet.payload, route.len());
        let next_hop = route[1];
        packet.source_route = Some(route);
        out.push(Action::Send {
            packet,
            mode: LinkMode::Unicast(next_hop),
        });
        None
    }

    fn flush_buffer(&mut self, out: &mut Vec<Action>) {
        let cache = &self.cache;
        let ready = self.buffer.take_where(|p| cache.route_to(p.flow.dst).is_some());
        for packet in ready {
            let dest = packet.flow.dst;
            self.discoveries.finish(dest);
            let unsent = self.send_with_cache(packet, out);
            debug_assert!(unsent.is_none());
        }
    }

    fn handle_rreq(&mut self, ctx: &mut AgentCtx<'_>, mut packet: Packet, out: &mut Vec<Action>) {
        let Some(Control::DsrRreq {
            originator,
            target,
            request_id,
        }) = packet.control.clone()
        else {
            return;
        };
        let Some(record) = packet.rreq_record.take() else {
            return;
        };
        if record.contains(&self.node) || !self.seen.insert((originator, request_id)) {
            return;
        }
        let mut completed = record.clone();
        completed.push(self.node);
        let back: Vec<NodeId> = completed.iter().rev().copied().collect();
        self.cache.add(back.clone(), ctx.now);

        if target == self.node {
            self.send_rrep(ctx, completed, back, request_id, out);
            return;
        }

        if self.params.cache_replies {
            if let Some(cached) = self.cache.route_to(target) {
                let mut full = completed.clone();
                full.extend_from_slice(&cached[1..]);
                if is_simple_path(&full) {
                    self.send_rrep(ctx, full, back, request_id, out);
                    return;
                }
            }
        }

        if packet.ttl <= 1 {
            return;
        }
        packet.ttl -= 1;
        packet.size = source_routed_size(RREQ_FIXED_BYTES, completed.len());
        packet.rreq_record = Some(completed);
        out.push(Action::Send {
            packet,
            mode: LinkMode::Broadcast,
        });
    }

    fn send_rrep(
        &self,
        ctx: &mut AgentCtx<'_>,
        route: Vec<NodeId>,
        back: Vec<NodeId>,
        request_id: u32,
        out: &mut Vec<Action>,
    ) {
        let originator = route[0];
        let mut rrep = Packet::new(
            ctx.fresh_uid(),
            FlowId::control(self.node, originator),
            request_id as u64,
            PacketKind::Rrep,
            0,
        );
        rrep.size = source_routed_size(RREP_FIXED_BYTES + 4 * route.len() as u32, back.len());
        rrep.ttl = self.params.rreq_ttl;
        let next_hop = back[1];
        rrep.source_route = Some(back);
        rrep.control = Some(Control::DsrRrep { route });
        out.push(Action::Send {
            packet: rrep,
            mode: LinkMode::Unicast(next_hop),
        });
    }

    /// Forwards along the stamped route, or reports arrival at its end.
    /// Returns the packet back when this node is the final hop.
    fn forward_source_routed(&self, mut packet: Packet, out: &mut Vec<Action>) -> Option<Packet> {
        let route = packet.source_route.as_deref().unwrap_or(&[]);
        let Some(idx) = route.iter().position(|&n| n == self.node) else {
            out.push(Action::Drop {
                packet,
                reason: DropReason::NotOnRoute,
            });
            return None;
        };
        if idx + 1 == route.len() {
            return Some(packet);
        }
        let next_hop = route[idx + 1];
        packet.ttl = packet.ttl.saturating_sub(1);
        if packet.ttl == 0 {
            out.push(Action::Drop {
                packet,
                reason: DropReason::TtlExpired,
            });
            return None;
        }
        out.push(Action::Send {
            packet,
            mode: LinkMode::Unicast(next_hop),
        });
        None
    }

    fn send_rerr(&self, ctx: &mut AgentCtx<'_>, broken_to: NodeId, back: Vec<NodeId>, out: &mut Vec<Action>) {
        let source = *back.last().expect("non-empty prefix");
        let mut rerr = Packet::new(
            ctx.fresh_uid(),
            FlowId::control(self.node, source),
            0,
            PacketKind::Rerr,
            0,
        );
        rerr.size = source_routed_size(RERR_FIXED_BYTES, back.len());
        rerr.ttl = self.params.rreq_ttl;
        let next_hop = back[1];
        rerr.source_route = Some(back);
        rerr.control = Some(Control::DsrRerr {
            broken_from: self.node,
            broken_to,
        });
        out.push(Action::Send {
            packet: rerr,
            mode: LinkMode::Unicast(next_hop),
        });
    }
}

impl RoutingAgent for DsrAgent {
    fn node(&self) -> NodeId {
        self.node
    }

    fn originate(&mut self, ctx: &mut AgentCtx<'_>, mut packet: Packet) -> Vec<Action> {
        let mut out = Vec::new();
        let dest = packet.flow.dst;
        packet.source_route = None;
        if dest == self.node {
            out.push(Action::Deliver(packet));
            return out;
        }
        if let Some(unsent) = self.send_with_cache(packet, &mut out) {
            self.buffer.push(unsent, &mut out);
            if !self.discoveries.is_pending(dest) {
                self.start_discovery(ctx, dest, 0, &mut out);
            }
        }
        out
    }

    fn receive(&mut self, ctx: &mut AgentCtx<'_>, _from: NodeId, packet: Packet) -> Vec<Action> {
        let mut out = Vec::new();
        match packet.kind {
            PacketKind::Rreq => self.handle_rreq(ctx, packet, &mut out),
            PacketKind::Rrep => {
                if let Some(rrep) = self.forward_source_routed(packet, &mut out) {
                    if let Some(Control::DsrRrep { route }) = rrep.control {
                        if self.cache.add(route, ctx.now) {
                            self.flush_buffer(&mut out);
                        }
                    }
                }
            }
            PacketKind::Rerr => {
                if let Some(Control::DsrRerr { broken_from, broken_to }) = packet.control {
                    self.cache.remove_link(broken_from, broken_to);
                }
                // arrival at the source needs no further action
                let _ = self.forward_source_routed(packet, &mut out);
            }
            PacketKind::Cbr | PacketKind::Tcp | PacketKind::Ack => {
                if let Some(arrived) = self.forward_source_routed(packet, &mut out) {
                    out.push(Action::Deliver(arrived));
                }
            }
        }
        out
    }

    fn link_failed(&mut self, ctx: &mut AgentCtx<'_>, next_hop: NodeId, packet: Packet) -> Vec<Action> {
        let mut out = Vec::new();
        self.cache.remove_link(self.node, next_hop);
        if !packet.kind.is_transport() {
            out.push(Action::Drop {
                packet,
                reason: DropReason::LinkBroken,
            });
            return out;
        }
        if packet.flow.src == self.node {
            let mut again = self.originate(ctx, packet);
            out.append(&mut again);
            return out;
        }
        let route = packet.source_route.as_deref().unwrap_or(&[]);
        if let Some(idx) = route.iter().position(|&n| n == self.node) {
            let back: Vec<NodeId> = route[..=idx].iter().rev().copied().collect();
            if back.len() >= 2 {
                self.send_rerr(ctx, next_hop, back, &mut out);
            }
        }
        out.push(Action::Drop {
            packet,
            reason: DropReason::LinkBroken,
        });
        out
    }

    fn timer(&mut self, ctx: &mut AgentCtx<'_>, timer: RoutingTimer) -> Vec<Action> {
        let mut out = Vec::new();
        let RoutingTimer::Discovery { dest, attempt } = timer;
        if self.cache.route_to(dest).is_some() {
            self.discoveries.finish(dest);
            self.flush_buffer(&mut out);
            return out;
        }
        if let Some(next) = discovery_timeout(
            &self.params,
            &mut self.discoveries,
            &mut self.buffer,
            dest,
            attempt,
            &mut out,
        ) {
            self.start_discovery(ctx, dest, next, &mut out);
        }
        out
    }
}
