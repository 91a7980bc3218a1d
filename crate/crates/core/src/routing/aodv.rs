//! Ad hoc On-demand Distance Vector agent.
//!
//! Routes are discovered with a flooded RREQ answered by a unicast RREP that
//! retraces the reverse path. Each node keeps one table entry per
//! destination, ordered by destination sequence number and then hop count.
//! Broken links are learned from the medium and reported upstream with RERR.
//! No HELLO beacons, local repair, gratuitous RREP or expanding ring search.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use super::{
    discovery_timeout, Action, AgentCtx, Discoveries, DropReason, RoutingAgent, RoutingParams, RoutingTimer, SendBuffer,
};
use crate::medium::LinkMode;
use crate::packet::{hop_by_hop_size, Control, FlowId, NodeId, Packet, PacketKind};
use crate::sim::SimTime;

const RREQ_BYTES: u32 = 48;
const RREP_BYTES: u32 = 44;
const RERR_BASE_BYTES: u32 = 24;
const RERR_ENTRY_BYTES: u32 = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct AodvRouteEntry {
    pub dest: NodeId,
    pub next_hop: NodeId,
    pub hop_count: u32,
    pub dest_seqno: u32,
    pub expires_at: SimTime,
    pub valid: bool,
    /// Upstream neighbors that forward through this entry.
    pub precursors: BTreeSet<NodeId>,
}

impl AodvRouteEntry {
    /// Valid and not yet expired.
    pub fn is_usable(&self, now: SimTime) -> bool {
        self.valid && self.expires_at > now
    }
}

pub struct AodvAgent {
    node: NodeId,
    params: RoutingParams,
    own_seqno: u32,
    next_request_id: u32,
    table: BTreeMap<NodeId, AodvRouteEntry>,
    seen: HashSet<(NodeId, u32)>,
    buffer: SendBuffer,
    discoveries: Discoveries,
}

impl AodvAgent {
    pub fn new(node: NodeId, params: RoutingParams) -> Self {
        AodvAgent {
            node,
            buffer: SendBuffer::new(params.send_buffer),
            params,
            own_seqno: 0,
            next_request_id: 0,
            table: BTreeMap::new(),
            seen: HashSet::new(),
            discoveries: Discoveries::default(),
        }
    }

    pub fn own_seqno(&self) -> u32 {
        self.own_seqno
    }

    pub fn table(&self) -> &BTreeMap<NodeId, AodvRouteEntry> {
        &self.table
    }

    pub fn route(&self, dest: NodeId) -> Option<&AodvRouteEntry> {
        self.table.get(&dest)
    }

    pub fn usable_route(&self, dest: NodeId, now: SimTime) -> Option<&AodvRouteEntry> {
        self.table.get(&dest).filter(|e| e.is_usable(now))
    }

    pub fn buffered(&self) -> usize {
        self.buffer.len()
    }

    pub fn discovery_pending(&self, dest: NodeId) -> bool {
        self.discoveries.is_pending(dest)
    }

    /// Seeds a table entry directly; used to set up scenarios in tests.
    pub fn install_route(&mut self, entry: AodvRouteEntry) {
        self.table.insert(entry.dest, entry);
    }

    fn refresh(&mut self, dest: NodeId, now: SimTime) {
        let lifetime = now + self.params.active_route_timeout;
        if let Some(e) = self.table.get_mut(&dest) {
            if e.is_usable(now) && e.expires_at < lifetime {
                e.expires_at = lifetime;
            }
        }
    }

    /// Installs or replaces the route to `dest` if the offer is fresher
    /// (higher sequence number), or equally fresh and either shorter or
    /// replacing an unusable entry. With `first_hand` the offer comes straight
    /// from the destination's own flood, so any unusable entry is replaced.
    /// The stored sequence number never decreases. Returns whether the table
    /// changed.
    fn offer_route(
        &mut self,
        now: SimTime,
        dest: NodeId,
        next_hop: NodeId,
        hop_count: u32,
        dest_seqno: u32,
        first_hand: bool,
    ) -> bool {
        let expires_at = now + self.params.active_route_timeout;
        match self.table.get_mut(&dest) {
            None => {
                self.table.insert(
                    dest,
                    AodvRouteEntry {
                        dest,
                        next_hop,
                        hop_count,
                        dest_seqno,
                        expires_at,
                        valid: true,
                        precursors: BTreeSet::new(),
                    },
                );
                true
            }
            Some(e) => {
                let fresher = dest_seqno > e.dest_seqno;
                let same_but_better = dest_seqno == e.dest_seqno && (hop_count < e.hop_count || !e.is_usable(now));
                let revive = first_hand && !e.is_usable(now);
                if !(fresher || same_but_better || revive) {
                    return false;
                }
                e.next_hop = next_hop;
                e.hop_count = hop_count;
                e.dest_seqno = e.dest_seqno.max(dest_seqno);
                e.expires_at = expires_at;
                e.valid = true;
                true
            }
        }
    }

    fn add_precursor(&mut self, dest: NodeId, precursor: NodeId) {
        if let Some(e) = self.table.get_mut(&dest) {
            e.precursors.insert(precursor);
        }
    }

    fn start_discovery(&mut self, ctx: &mut AgentCtx<'_>, dest: NodeId, attempt: u32, out: &mut Vec<Action>) {
        self.own_seqno += 1;
        self.next_request_id += 1;
        let request_id = self.next_request_id;
        self.seen.insert((self.node, request_id));
        let dest_seqno = self.table.get(&dest).map_or(0, |e| e.dest_seqno);

        let mut rreq = Packet::new(
            ctx.fresh_uid(),
            FlowId::control(self.node, dest),
            request_id as u64,
            PacketKind::Rreq,
            0,
        );
        rreq.size = RREQ_BYTES;
        rreq.ttl = self.params.rreq_ttl;
        rreq.control = Some(Control::AodvRreq {
            originator: self.node,
            originator_seqno: self.own_seqno,
            request_id,
            dest,
            dest_seqno,
            hop_count: 0,
        });
        self.discoveries.begin(dest, attempt);
        out.push(Action::Send {
            packet: rreq,
            mode: LinkMode::Broadcast,
        });
        out.push(Action::Timer {
            after: Discoveries::timeout_for(&self.params, attempt),
            timer: RoutingTimer::Discovery { dest, attempt },
        });
    }

    fn send_rerr(&self, ctx: &mut AgentCtx<'_>, unreachable: Vec<(NodeId, u32)>, out: &mut Vec<Action>) {
        let mut rerr = Packet::new(
            ctx.fresh_uid(),
            FlowId::control(self.node, unreachable[0].0),
            0,
            PacketKind::Rerr,
            0,
        );
        rerr.size = RERR_BASE_BYTES + RERR_ENTRY_BYTES * unreachable.len() as u32;
        rerr.ttl = 1;
        rerr.control = Some(Control::AodvRerr { unreachable });
        out.push(Action::Send {
            packet: rerr,
            mode: LinkMode::Broadcast,
        });
    }

    /// Sends every buffered packet that now has a usable route.
    fn flush_buffer(&mut self, now: SimTime, out: &mut Vec<Action>) {
        let ready: BTreeSet<NodeId> = self
            .table
            .values()
            .filter(|e| e.is_usable(now))
            .map(|e| e.dest)
            .collect();
        for dest in &ready {
            if self.discoveries.is_pending(*dest) {
                self.discoveries.finish(*dest);
            }
        }
        let packets = self.buffer.take_where(|p| ready.contains(&p.flow.dst));
        for packet in packets {
            self.forward_data(now, packet, out);
        }
    }

    /// Unicasts along the usable route to the packet's destination.
    fn forward_data(&mut self, now: SimTime, packet: Packet, out: &mut Vec<Action>) {
        let dest = packet.flow.dst;
        let next_hop = self.table[&dest].next_hop;
        self.refresh(dest, now);
        self.refresh(next_hop, now);
        out.push(Action::Send {
            packet,
            mode: LinkMode::Unicast(next_hop),
        });
    }

    fn handle_data(&mut self, ctx: &mut AgentCtx<'_>, from: NodeId, mut packet: Packet, out: &mut Vec<Action>) {
        let now = ctx.now;
        self.refresh(packet.flow.src, now);
        if packet.flow.dst == self.node {
            out.push(Action::Deliver(packet));
            return;
        }
        let dest = packet.flow.dst;
        if self.usable_route(dest, now).is_none() {
            let seqno = self.table.get(&dest).map_or(0, |e| e.dest_seqno);
            out.push(Action::Drop {
                packet,
                reason: DropReason::NoRoute,
            });
            self.send_rerr(ctx, vec![(dest, seqno)], out);
            return;
        }
        packet.ttl = packet.ttl.saturating_sub(1);
        if packet.ttl == 0 {
            out.push(Action::Drop {
                packet,
                reason: DropReason::TtlExpired,
            });
            return;
        }
        self.add_precursor(dest, from);
        self.forward_data(now, packet, out);
    }

    fn handle_rreq(&mut self, ctx: &mut AgentCtx<'_>, from: NodeId, mut packet: Packet, out: &mut Vec<Action>) {
        let Some(Control::AodvRreq {
            originator,
            originator_seqno,
            request_id,
            dest,
            dest_seqno,
            hop_count,
        }) = packet.control.clone()
        else {
            return;
        };
        if originator == self.node || !self.seen.insert((originator, request_id)) {
            return;
        }
        let now = ctx.now;
        let hops = hop_count + 1;
        self.offer_route(now, originator, from, hops, originator_seqno, true);
        let reverse_hop = self.table[&originator].next_hop;

        if dest == self.node {
            self.own_seqno = self.own_seqno.max(dest_seqno) + 1;
            let rrep = self.make_rrep(ctx, originator, dest, self.own_seqno, 0);
            out.push(Action::Send {
                packet: rrep,
                mode: LinkMode::Unicast(reverse_hop),
            });
            return;
        }

        let cached = self
            .usable_route(dest, now)
            .filter(|e| e.dest_seqno >= dest_seqno)
            .map(|e| (e.dest_seqno, e.hop_count, e.next_hop));
        if let Some((seqno, route_hops, forward_hop)) = cached {
            let rrep = self.make_rrep(ctx, originator, dest, seqno, route_hops);
            self.add_precursor(dest, reverse_hop);
            self.add_precursor(originator, forward_hop);
            out.push(Action::Send {
                packet: rrep,
                mode: LinkMode::Unicast(reverse_hop),
            });
            return;
        }

        if packet.ttl <= 1 {
            return;
        }
        packet.ttl -= 1;
        let known = self.table.get(&dest).map_or(0, |e| e.dest_seqno);
        packet.control = Some(Control::AodvRreq {
            originator,
            originator_seqno,
            request_id,
            dest,
            dest_seqno: dest_seqno.max(known),
            hop_count: hops,
        });
        out.push(Action::Send {
            packet,
            mode: LinkMode::Broadcast,
        });
    }

    fn make_rrep(
        &self,
        ctx: &mut AgentCtx<'_>,
        originator: NodeId,
        dest: NodeId,
        dest_seqno: u32,
        hop_count: u32,
    ) -> Packet {
        let mut rrep = Packet::new(
            ctx.fresh_uid(),
            FlowId::control(self.node, originator),
            dest_seqno as u64,
            PacketKind::Rrep,
            0,
        );
        rrep.size = RREP_BYTES;
        rrep.ttl = self.params.rreq_ttl;
        rrep.control = Some(Control::AodvRrep {
            originator,
            dest,
            dest_seqno,
            hop_count,
        });
        rrep
    }

    fn handle_rrep(&mut self, ctx: &mut AgentCtx<'_>, from: NodeId, mut packet: Packet, out: &mut Vec<Action>) {
        let Some(Control::AodvRrep {
            originator,
            dest,
            dest_seqno,
            hop_count,
        }) = packet.control.clone()
        else {
            return;
        };
        if dest == self.node {
            return;
        }
        let now = ctx.now;
        let hops = hop_count + 1;
        if !self.offer_route(now, dest, from, hops, dest_seqno, false) {
            return;
        }
        if originator == self.node {
            self.discoveries.finish(dest);
            self.flush_buffer(now, out);
            return;
        }
        let Some(reverse_hop) = self.usable_route(originator, now).map(|e| e.next_hop) else {
            out.push(Action::Drop {
                packet,
                reason: DropReason::NoReverseRoute,
            });
            return;
        };
        packet.ttl = packet.ttl.saturating_sub(1);
        if packet.ttl == 0 {
            out.push(Action::Drop {
                packet,
                reason: DropReason::TtlExpired,
            });
            return;
        }
        self.add_precursor(dest, reverse_hop);
        self.add_precursor(originator, from);
        self.refresh(originator, now);
        packet.control = Some(Control::AodvRrep {
            originator,
            dest,
            dest_seqno,
            hop_count: hops,
        });
        out.push(Action::Send {
            packet,
            mode: LinkMode::Unicast(reverse_hop),
        });
    }

    fn handle_rerr(&mut self, ctx: &mut AgentCtx<'_>, from: NodeId, packet: Packet, out: &mut Vec<Action>) {
        let Some(Control::AodvRerr { unreachable }) = packet.control else {
            return;
        };
        let mut lost = Vec::new();
        let mut notify = false;
        for (dest, seqno) in unreachable {
            if let Some(e) = self.table.get_mut(&dest) {
                if e.valid && e.next_hop == from {
                    e.valid = false;
                    e.dest_seqno = e.dest_seqno.max(seqno);
                    notify |= !e.precursors.is_empty();
                    lost.push((dest, e.dest_seqno));
                }
            }
        }
        if notify {
            self.send_rerr(ctx, lost, out);
        }
    }
}

impl RoutingAgent for AodvAgent {
    fn node(&self) -> NodeId {
        self.node
    }

    fn originate(&mut self, ctx: &mut AgentCtx<'_>, mut packet: Packet) -> Vec<Action> {
        let mut out = Vec::new();
        let dest = packet.flow.dst;
        packet.size = hop_by_hop_size(packet.payload);
        packet.source_route = None;
        if dest == self.node {
            out.push(Action::Deliver(packet));
            return out;
        }
        if self.usable_route(dest, ctx.now).is_some() {
            self.forward_data(ctx.now, packet, &mut out);
            return out;
        }
        self.buffer.push(packet, &mut out);
        if !self.discoveries.is_pending(dest) {
            self.start_discovery(ctx, dest, 0, &mut out);
        }
        out
    }

    fn receive(&mut self, ctx: &mut AgentCtx<'_>, from: NodeId, packet: Packet) -> Vec<Action> {
        let mut out = Vec::new();
        match packet.kind {
            PacketKind::Rreq => self.handle_rreq(ctx, from, packet, &mut out),
            PacketKind::Rrep => self.handle_rrep(ctx, from, packet, &mut out),
            PacketKind::Rerr => self.handle_rerr(ctx, from, packet, &mut out),
            PacketKind::Cbr | PacketKind::Tcp | PacketKind::Ack => self.handle_data(ctx, from, packet, &mut out),
        }
        out
    }

    fn link_failed(&mut self, ctx: &mut AgentCtx<'_>, next_hop: NodeId, packet: Packet) -> Vec<Action> {
        let mut out = Vec::new();
        let mut lost = Vec::new();
        let mut notify = false;
        for e in self.table.values_mut() {
            if e.valid && e.next_hop == next_hop {
                e.valid = false;
                e.dest_seqno += 1;
                notify |= !e.precursors.is_empty();
                lost.push((e.dest, e.dest_seqno));
            }
        }
        if notify {
            self.send_rerr(ctx, lost, &mut out);
        }
        if packet.kind.is_transport() && packet.flow.src == self.node {
            let mut again = self.originate(ctx, packet);
            out.append(&mut again);
        } else {
            out.push(Action::Drop {
                packet,
                reason: DropReason::LinkBroken,
            });
        }
        out
    }

    fn timer(&mut self, ctx: &mut AgentCtx<'_>, timer: RoutingTimer) -> Vec<Action> {
        let mut out = Vec::new();
        let RoutingTimer::Discovery { dest, attempt } = timer;
        if self.usable_route(dest, ctx.now).is_some() {
            self.flush_buffer(ctx.now, &mut out);
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

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(uid: &mut u64, secs: u64) -> AgentCtx<'_> {
        AgentCtx::new(SimTime::from_secs(secs), uid)
    }

    fn data(src: NodeId, dst: NodeId) -> Packet {
        Packet::new(100, FlowId::new(src, dst, 0, 0), 0, PacketKind::Cbr, 512)
    }

    fn entry(dest: NodeId, next_hop: NodeId, hop_count: u32, dest_seqno: u32) -> AodvRouteEntry {
        AodvRouteEntry {
            dest,
            next_hop,
            hop_count,
            dest_seqno,
            expires_at: SimTime::from_secs(100),
            valid: true,
            precursors: BTreeSet::new(),
        }
    }

    fn rrep(originator: NodeId, dest: NodeId, dest_seqno: u32, hop_count: u32) -> Packet {
        let mut p = Packet::new(1, FlowId::control(dest, originator), 0, PacketKind::Rrep, 0);
        p.ttl = 30;
        p.control = Some(Control::AodvRrep {
            originator,
            dest,
            dest_seqno,
            hop_count,
        });
        p
    }

    fn sends(actions: &[Action]) -> Vec<(PacketKind, LinkMode)> {
        actions
            .iter()
            .filter_map(|a| match a {
                Action::Send { packet, mode } => Some((packet.kind, *mode)),
                _ => None,
            })
            .collect()
    }

    #[test]
    fn originate_with_route_unicasts_without_rreq() {
        let mut uid = 0;
        let mut a = AodvAgent::new(0, RoutingParams::default());
        a.install_route(entry(2, 1, 2, 3));
        let out = a.originate(&mut ctx(&mut uid, 1), data(0, 2));
        assert_eq!(sends(&out), vec![(PacketKind::Cbr, LinkMode::Unicast(1))]);
    }

    #[test]
    fn originate_without_route_floods_and_buffers() {
        let mut uid = 0;
        let mut a = AodvAgent::new(0, RoutingParams::default());
        let out = a.originate(&mut ctx(&mut uid, 1), data(0, 2));
        assert_eq!(sends(&out), vec![(PacketKind::Rreq, LinkMode::Broadcast)]);
        assert_eq!(a.buffered(), 1);
        assert_eq!(a.own_seqno(), 1);
        // a second packet joins the pending discovery
        let out = a.originate(&mut ctx(&mut uid, 1), data(0, 2));
        assert!(sends(&out).is_empty());
        assert_eq!(a.buffered(), 2);
    }

    #[test]
    fn buffer_overflow_drops_oldest() {
        let mut uid = 0;
        let params = RoutingParams {
            send_buffer: 2,
            ..RoutingParams::default()
        };
        let mut a = AodvAgent::new(0, params);
        for seq in 0..3 {
            let mut p = data(0, 2);
            p.seqno = seq;
            let out = a.originate(&mut ctx(&mut uid, 1), p);
            if seq == 2 {
                let dropped: Vec<u64> = out
                    .iter()
                    .filter_map(|x| match x {
                        Action::Drop {
                            packet,
                            reason: DropReason::BufferOverflow,
                        } => Some(packet.seqno),
                        _ => None,
                    })
                    .collect();
                assert_eq!(dropped, vec![0]);
            }
        }
        assert_eq!(a.buffered(), 2);
    }

    fn rreq_from(originator: NodeId, request_id: u32, dest: NodeId) -> Packet {
        let mut p = Packet::new(1, FlowId::control(originator, dest), 0, PacketKind::Rreq, 0);
        p.ttl = 30;
        p.control = Some(Control::AodvRreq {
            originator,
            originator_seqno: 1,
            request_id,
            dest,
            dest_seqno: 0,
            hop_count: 0,
        });
        p
    }

    #[test]
    fn duplicate_rreq_is_silently_dropped() {
        let mut uid = 0;
        let mut b = AodvAgent::new(1, RoutingParams::default());
        let first = b.receive(&mut ctx(&mut uid, 1), 0, rreq_from(0, 1, 2));
        assert_eq!(sends(&first), vec![(PacketKind::Rreq, LinkMode::Broadcast)]);
        let second = b.receive(&mut ctx(&mut uid, 1), 3, rreq_from(0, 1, 2));
        assert!(second.is_empty());
    }

    #[test]
    fn destination_answers_with_incremented_seqno() {
        let mut uid = 0;
        let mut c = AodvAgent::new(2, RoutingParams::default());
        let out = c.receive(&mut ctx(&mut uid, 1), 1, rreq_from(0, 1, 2));
        assert_eq!(sends(&out), vec![(PacketKind::Rrep, LinkMode::Unicast(1))]);
        let Action::Send { packet, .. } = &out[0] else {
            unreachable!()
        };
        let Some(Control::AodvRrep {
            dest_seqno, hop_count, ..
        }) = &packet.control
        else {
            panic!()
        };
        assert_eq!(*dest_seqno, 1);
        assert_eq!(*hop_count, 0);
        assert_eq!(c.own_seqno(), 1);
        // reverse route to the originator via the sender
        assert_eq!(c.route(0).unwrap().next_hop, 1);
    }

    #[test]
    fn intermediate_with_fresh_route_replies() {
        let mut uid = 0;
        let mut b = AodvAgent::new(1, RoutingParams::default());
        b.install_route(entry(5, 4, 2, 7));
        let mut req = rreq_from(0, 1, 5);
        if let Some(Control::AodvRreq { dest_seqno, .. }) = &mut req.control {
            *dest_seqno = 6;
        }
        let out = b.receive(&mut ctx(&mut uid, 1), 0, req);
        assert_eq!(sends(&out), vec![(PacketKind::Rrep, LinkMode::Unicast(0))]);

        // a stale cached route must not answer
        let mut b = AodvAgent::new(1, RoutingParams::default());
        b.install_route(entry(5, 4, 2, 7));
        let mut req = rreq_from(0, 2, 5);
        if let Some(Control::AodvRreq { dest_seqno, .. }) = &mut req.control {
            *dest_seqno = 8;
        }
        let out = b.receive(&mut ctx(&mut uid, 1), 0, req);
        assert_eq!(sends(&out), vec![(PacketKind::Rreq, LinkMode::Broadcast)]);
    }

    #[test]
    fn older_rrep_is_ignored() {
        let mut uid = 0;
        let mut a = AodvAgent::new(0, RoutingParams::default());
        a.install_route(entry(9, 3, 4, 5));
        let out = a.receive(&mut ctx(&mut uid, 1), 1, rrep(0, 9, 4, 0));
        assert!(out.is_empty());
        let e = a.route(9).unwrap();
        assert_eq!((e.next_hop, e.hop_count, e.dest_seqno), (3, 4, 5));
    }

    #[test]
    fn equal_seqno_shorter_rrep_replaces() {
        let mut uid = 0;
        let mut a = AodvAgent::new(0, RoutingParams::default());
        a.install_route(entry(9, 3, 4, 5));
        a.receive(&mut ctx(&mut uid, 1), 1, rrep(0, 9, 5, 1));
        let e = a.route(9).unwrap();
        assert_eq!((e.next_hop, e.hop_count, e.dest_seqno), (1, 2, 5));
    }

    #[test]
    fn rrep_without_reverse_route_is_dropped() {
        let mut uid = 0;
        let mut b = AodvAgent::new(1, RoutingParams::default());
        let out = b.receive(&mut ctx(&mut uid, 1), 2, rrep(0, 2, 3, 0));
        assert!(matches!(
            out.as_slice(),
            [Action::Drop {
                reason: DropReason::NoReverseRoute,
                ..
            }]
        ));
    }

    #[test]
    fn rrep_at_originator_flushes_buffer() {
        let mut uid = 0;
        let mut a = AodvAgent::new(0, RoutingParams::default());
        a.originate(&mut ctx(&mut uid, 1), data(0, 2));
        let out = a.receive(&mut ctx(&mut uid, 1), 1, rrep(0, 2, 1, 1));
        assert_eq!(sends(&out), vec![(PacketKind::Cbr, LinkMode::Unicast(1))]);
        assert_eq!(a.buffered(), 0);
        assert!(!a.discovery_pending(2));
        assert_eq!(a.route(2).unwrap().hop_count, 2);
    }

    #[test]
    fn link_break_invalidates_all_routes_through_hop() {
        let mut uid = 0;
        let mut b = AodvAgent::new(1, RoutingParams::default());
        let mut e1 = entry(5, 4, 2, 7);
        e1.precursors.insert(0);
        b.install_route(e1);
        b.install_route(entry(6, 4, 3, 2));
        b.install_route(entry(8, 7, 1, 1));
        let out = b.link_failed(&mut ctx(&mut uid, 1), 4, data(0, 5));
        let rerrs: Vec<&Packet> = out
            .iter()
            .filter_map(|a| match a {
                Action::Send { packet, .. } if packet.kind == PacketKind::Rerr => Some(packet),
                _ => None,
            })
            .collect();
        assert_eq!(rerrs.len(), 1);
        assert_eq!(
            rerrs[0].control,
            Some(Control::AodvRerr {
                unreachable: vec![(5, 8), (6, 3)]
            })
        );
        assert!(!b.route(5).unwrap().valid);
        assert!(!b.route(6).unwrap().valid);
        assert!(b.route(8).unwrap().valid);
    }

    #[test]
    fn rerr_from_non_next_hop_is_ignored() {
        let mut uid = 0;
        let mut a = AodvAgent::new(0, RoutingParams::default());
        a.install_route(entry(5, 1, 2, 7));
        let mut rerr = Packet::new(1, FlowId::control(3, 5), 0, PacketKind::Rerr, 0);
        rerr.control = Some(Control::AodvRerr {
            unreachable: vec![(5, 9)],
        });
        let out = a.receive(&mut ctx(&mut uid, 1), 3, rerr.clone());
        assert!(out.is_empty());
        assert!(a.route(5).unwrap().valid);
        a.receive(&mut ctx(&mut uid, 1), 1, rerr);
        let e = a.route(5).unwrap();
        assert!(!e.valid);
        assert_eq!(e.dest_seqno, 9);
    }

    #[test]
    fn expired_route_is_not_used() {
        let mut uid = 0;
        let mut a = AodvAgent::new(0, RoutingParams::default());
        a.install_route(entry(2, 1, 1, 1));
        let out = a.originate(&mut ctx(&mut uid, 150), data(0, 2));
        assert_eq!(sends(&out), vec![(PacketKind::Rreq, LinkMode::Broadcast)]);
    }

    #[test]
    fn discovery_gives_up_after_retries() {
        let mut uid = 0;
        let mut a = AodvAgent::new(0, RoutingParams::default());
        a.originate(&mut ctx(&mut uid, 0), data(0, 2));
        let mut attempt = 0;
        let mut rreqs = 1;
        loop {
            let out = a.timer(&mut ctx(&mut uid, 1), RoutingTimer::Discovery { dest: 2, attempt });
            if out.iter().any(|x| {
                matches!(
                    x,
                    Action::Drop {
                        reason: DropReason::DiscoveryFailed,
                        ..
                    }
                )
            }) {
                break;
            }
            rreqs += sends(&out).len();
            let Some(Action::Timer {
                after,
                timer: RoutingTimer::Discovery { attempt: next, .. },
            }) = out.iter().find(|x| matches!(x, Action::Timer { .. }))
            else {
                panic!("retry without timer")
            };
            assert_eq!(*after, SimTime::from_secs(1 << next));
            attempt = *next;
        }
        assert_eq!(rreqs, 4);
        assert_eq!(a.buffered(), 0);
    }
}
