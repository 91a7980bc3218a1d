//! The simulated world: nodes, their routing and transport agents, the
//! shared medium, and the trace they produce.

use crate::medium::{EnqueueOutcome, Frame, LinkMode, LinkParams, Medium};
use crate::mobility::MobilityModel;
use crate::packet::{NodeId, Packet, PacketKind};
use crate::routing::{Action, AgentCtx, Protocol, Router, RoutingAgent, RoutingParams, RoutingTimer};
use crate::sim::{RngStream, Scheduler, SimTime, StreamLabel, Target};
use crate::trace::{Layer, TraceEvent, TraceRecord};
use crate::traffic::{
    CbrSource, DatagramSink, FlowSpec, ReliableReceiver, ReliableSender, SenderOutput, TrafficKind, TrafficParams,
};

/// Everything needed to build a [`Simulation`] besides the motion.
#[derive(Debug, Clone)]
pub struct NetworkSetup {
    pub protocol: Protocol,
    pub routing: RoutingParams,
    pub link: LinkParams,
    pub traffic: TrafficParams,
    pub flows: Vec<FlowSpec>,
    pub end: SimTime,
    pub seed: u64,
}

#[derive(Debug, Clone)]
enum Ev {
    AppTick {
        flow: usize,
    },
    AppStop {
        flow: usize,
    },
    TcpTimeout {
        flow: usize,
        gen: u64,
    },
    TxDone,
    Rx {
        from: NodeId,
        packet: Packet,
        unicast: bool,
    },
    LinkBreak {
        next_hop: NodeId,
        packet: Packet,
    },
    Routing(RoutingTimer),
}

enum FlowState {
    Cbr {
        source: CbrSource,
        sink: DatagramSink,
    },
    Tcp {
        sender: ReliableSender,
        receiver: ReliableReceiver,
    },
}

/// One frame put on the air, kept when hop recording is enabled.
#[derive(Debug, Clone, PartialEq)]
pub struct HopRecord {
    pub time: SimTime,
    pub node: NodeId,
    /// `None` for broadcasts.
    pub next_hop: Option<NodeId>,
    pub kind: PacketKind,
    pub seqno: u64,
    pub source_route: Option<Vec<NodeId>>,
}

pub struct Simulation {
    sched: Scheduler<Ev>,
    end: SimTime,
    mobility: MobilityModel,
    medium: Medium,
    routers: Vec<Router>,
    flows: Vec<FlowSpec>,
    states: Vec<FlowState>,
    ack_size: u32,
    next_uid: u64,
    trace: Vec<TraceRecord>,
    hops: Option<Vec<HopRecord>>,
}

impl Simulation {
    pub fn new(setup: NetworkSetup, mobility: MobilityModel) -> Self {
        let nodes = mobility.node_count();
        let mut sched = Scheduler::new();
        let mut states = Vec::with_capacity(setup.flows.len());
        for (i, flow) in setup.flows.iter().enumerate() {
            assert_eq!(flow.index, i, "flow indices must match list positions");
            assert!((flow.src as usize) < nodes && (flow.dst as usize) < nodes);
            let state = match flow.kind {
                TrafficKind::Cbr => FlowState::Cbr {
                    source: CbrSource::new(),
                    sink: DatagramSink::default(),
                },
                TrafficKind::Tcp => FlowState::Tcp {
                    sender: ReliableSender::new(setup.traffic.reliable.clone()),
                    receiver: ReliableReceiver::default(),
                },
            };
            states.push(state);
            if flow.start_at < flow.stop_at && flow.start_at <= setup.end {
                let target = Target::Node(flow.src);
                sched
                    .schedule(flow.start_at, target, Ev::AppTick { flow: i })
                    .expect("clock at zero");
                if flow.kind == TrafficKind::Tcp {
                    sched
                        .schedule(flow.stop_at, target, Ev::AppStop { flow: i })
                        .expect("clock at zero");
                }
            }
        }
        Simulation {
            sched,
            end: setup.end,
            medium: Medium::new(setup.link, nodes, RngStream::new(setup.seed, StreamLabel::Jitter)),
            routers: (0..nodes as NodeId)
                .map(|n| Router::new(setup.protocol, n, setup.routing.clone()))
                .collect(),
            mobility,
            flows: setup.flows,
            states,
            ack_size: setup.traffic.ack_size,
            next_uid: 0,
            trace: Vec::new(),
            hops: None,
        }
    }

    /// Keep a [`HopRecord`] for every transmission from now on.
    pub fn record_hops(&mut self) {
        self.hops.get_or_insert_with(Vec::new);
    }

    pub fn hops(&self) -> &[HopRecord] {
        self.hops.as_deref().unwrap_or(&[])
    }

    pub fn now(&self) -> SimTime {
        self.sched.now()
    }

    pub fn end(&self) -> SimTime {
        self.end
    }

    pub fn trace(&self) -> &[TraceRecord] {
        &self.trace
    }

    pub fn into_trace(self) -> Vec<TraceRecord> {
        self.trace
    }

    pub fn router(&self, node: NodeId) -> &Router {
        &self.routers[node as usize]
    }

    pub fn mobility(&self) -> &MobilityModel {
        &self.mobility
    }

    pub fn flows(&self) -> &[FlowSpec] {
        &self.flows
    }

    /// Runs to the end of the scenario. Returns the number of dispatched events.
    pub fn run(&mut self) -> u64 {
        self.run_until(self.end)
    }

    /// Dispatches every event due by `until` (capped at the scenario end).
    pub fn run_until(&mut self, until: SimTime) -> u64 {
        let until = until.min(self.end);
        let mut dispatched = 0;
        while let Some(ev) = self.sched.pop_due(until) {
            let node = match ev.target {
                Target::Node(n) => n,
                Target::Global => unreachable!("all world events are node-addressed"),
            };
            self.dispatch(node, ev.payload);
            dispatched += 1;
        }
        self.sched.advance_to(until);
        dispatched
    }

    fn at(&mut self, when: SimTime, node: NodeId, ev: Ev) {
        self.sched
            .schedule(when, Target::Node(node), ev)
            .expect("world events are never scheduled in the past");
    }

    fn log(&mut self, event: TraceEvent, node: NodeId, layer: Layer, packet: &Packet, size: u32) {
        self.trace.push(TraceRecord {
            event,
            time: self.sched.now(),
            node,
            layer,
            seqno: packet.seqno,
            pkt_type: packet.kind,
            size,
            flow: packet.flow,
        });
    }

    fn dispatch(&mut self, node: NodeId, ev: Ev) {
        let now = self.sched.now();
        match ev {
            Ev::AppTick { flow } => self.app_tick(flow),
            Ev::AppStop { flow } => {
                if let FlowState::Tcp { sender, .. } = &mut self.states[flow] {
                    sender.close();
                }
            }
            Ev::TcpTimeout { flow, gen } => {
                let out = match &mut self.states[flow] {
                    FlowState::Tcp { sender, .. } => sender.on_timeout(gen, now),
                    FlowState::Cbr { .. } => return,
                };
                self.tcp_output(flow, out);
            }
            Ev::TxDone => {
                self.medium.finish(node);
                self.try_start(node);
            }
            Ev::Rx { from, packet, unicast } => {
                if unicast {
                    let size = packet.size;
                    self.log(TraceEvent::Recv, node, Layer::Rtr, &packet, size);
                }
                let mut ctx = AgentCtx::new(now, &mut self.next_uid);
                let actions = self.routers[node as usize].receive(&mut ctx, from, packet);
                self.apply(node, actions);
            }
            Ev::LinkBreak { next_hop, packet } => {
                let mut ctx = AgentCtx::new(now, &mut self.next_uid);
                let actions = self.routers[node as usize].link_failed(&mut ctx, next_hop, packet);
                self.apply(node, actions);
            }
            Ev::Routing(timer) => {
                let mut ctx = AgentCtx::new(now, &mut self.next_uid);
                let actions = self.routers[node as usize].timer(&mut ctx, timer);
                self.apply(node, actions);
            }
        }
    }

    fn new_packet(&mut self, flow: usize, seqno: u64, kind: PacketKind, payload: u32) -> Packet {
        let uid = self.next_uid;
        self.next_uid += 1;
        let mut p = Packet::new(uid, self.flows[flow].id(), seqno, kind, payload);
        p.timestamp = Some(self.sched.now());
        p
    }

    fn app_tick(&mut self, flow: usize) {
        let now = self.sched.now();
        let spec = self.flows[flow].clone();
        match &mut self.states[flow] {
            FlowState::Cbr { source, .. } => {
                let (seq, next) = source.emit(&spec, now);
                if let Some(next) = next {
                    self.at(next, spec.src, Ev::AppTick { flow });
                }
                let packet = self.new_packet(flow, seq, PacketKind::Cbr, spec.size);
                self.log(TraceEvent::Send, spec.src, Layer::Agt, &packet, spec.size);
                self.originate(spec.src, packet);
            }
            FlowState::Tcp { sender, .. } => {
                let bulk = spec.interval == SimTime::ZERO;
                sender.app_write(if bulk { u64::MAX } else { 1 });
                let out = sender.pump(now);
                let next = now + spec.interval;
                if !bulk && next < spec.stop_at {
                    self.at(next, spec.src, Ev::AppTick { flow });
                }
                self.tcp_output(flow, out);
            }
        }
    }

    fn tcp_output(&mut self, flow: usize, out: SenderOutput) {
        let src = self.flows[flow].src;
        let size = self.flows[flow].size;
        if let Some((at, gen)) = out.timer {
            self.at(at, src, Ev::TcpTimeout { flow, gen });
        }
        for seg in out.segments {
            let packet = self.new_packet(flow, seg.seq, PacketKind::Tcp, size);
            if seg.first {
                self.log(TraceEvent::Send, src, Layer::Agt, &packet, size);
            }
            self.originate(src, packet);
        }
    }

    fn originate(&mut self, node: NodeId, packet: Packet) {
        let mut ctx = AgentCtx::new(self.sched.now(), &mut self.next_uid);
        let actions = self.routers[node as usize].originate(&mut ctx, packet);
        self.apply(node, actions);
    }

    fn apply(&mut self, node: NodeId, actions: Vec<Action>) {
        let now = self.sched.now();
        for action in actions {
            match action {
                Action::Send { packet, mode } => {
                    let event = if packet.flow.src == node {
                        TraceEvent::Send
                    } else {
                        TraceEvent::Forward
                    };
                    let size = packet.size;
                    self.log(event, node, Layer::Rtr, &packet, size);
                    if let EnqueueOutcome::Dropped = self.medium.enqueue(
                        node,
                        Frame {
                            packet: packet.clone(),
                            mode,
                        },
                    ) {
                        self.log(TraceEvent::Drop, node, Layer::Mac, &packet, size);
                    }
                    self.try_start(node);
                }
                Action::Deliver(packet) => self.deliver(node, packet),
                Action::Drop { packet, .. } => {
                    let size = packet.size;
                    self.log(TraceEvent::Drop, node, Layer::Rtr, &packet, size);
                }
                Action::Timer { after, timer } => self.at(now + after, node, Ev::Routing(timer)),
            }
        }
    }

    fn try_start(&mut self, node: NodeId) {
        let Some(frame) = self.medium.start_next(node) else {
            return;
        };
        let now = self.sched.now();
        let tx = self.medium.transmit(&self.mobility, node, &frame, now);
        if let Some(hops) = &mut self.hops {
            hops.push(HopRecord {
                time: now,
                node,
                next_hop: match frame.mode {
                    LinkMode::Unicast(n) => Some(n),
                    LinkMode::Broadcast => None,
                },
                kind: frame.packet.kind,
                seqno: frame.packet.seqno,
                source_route: frame.packet.source_route.clone(),
            });
        }
        let unicast = matches!(frame.mode, LinkMode::Unicast(_));
        for &lost in &tx.lost {
            let size = frame.packet.size;
            self.log(TraceEvent::Drop, lost, Layer::Mac, &frame.packet, size);
        }
        for &(to, at) in &tx.deliveries {
            self.at(
                at,
                to,
                Ev::Rx {
                    from: node,
                    packet: frame.packet.clone(),
                    unicast,
                },
            );
        }
        let Frame { packet, mode } = frame;
        if let (Some(at), LinkMode::Unicast(next_hop)) = (tx.link_break_at, mode) {
            self.at(at, node, Ev::LinkBreak { next_hop, packet });
        }
        self.at(tx.busy_until, node, Ev::TxDone);
    }

    fn flow_of(&self, packet: &Packet) -> Option<usize> {
        let (a, b) = (packet.flow.src_port as usize, packet.flow.dst_port as usize);
        let idx = if packet.kind == PacketKind::Ack { b } else { a };
        let spec = self.flows.get(idx)?;
        let expected = if packet.kind == PacketKind::Ack {
            spec.id().reversed()
        } else {
            spec.id()
        };
        (expected == packet.flow).then_some(idx)
    }

    fn deliver(&mut self, node: NodeId, packet: Packet) {
        let Some(flow) = self.flow_of(&packet) else {
            return;
        };
        let now = self.sched.now();
        let size = self.flows[flow].size;
        match (&mut self.states[flow], packet.kind) {
            (FlowState::Cbr { sink, .. }, PacketKind::Cbr) => {
                if node == packet.flow.dst && sink.accept(packet.seqno) {
                    self.log(TraceEvent::Recv, node, Layer::Agt, &packet, size);
                }
            }
            (FlowState::Tcp { receiver, .. }, PacketKind::Tcp) => {
                if node != packet.flow.dst {
                    return;
                }
                let (delivered, ackno) = receiver.on_segment(packet.seqno);
                for seq in delivered {
                    let mut rec = packet.clone();
                    rec.seqno = seq;
                    self.log(TraceEvent::Recv, node, Layer::Agt, &rec, size);
                }
                let ack_size = self.ack_size;
                let uid = self.next_uid;
                self.next_uid += 1;
                let mut ack = Packet::new(uid, packet.flow.reversed(), ackno, PacketKind::Ack, ack_size);
                ack.timestamp = Some(now);
                self.originate(node, ack);
            }
            (FlowState::Tcp { sender, .. }, PacketKind::Ack) => {
                if node != packet.flow.dst {
                    return;
                }
                let out = sender.on_ack(packet.seqno, now);
                self.tcp_output(flow, out);
            }
            _ => {}
        }
    }
}
