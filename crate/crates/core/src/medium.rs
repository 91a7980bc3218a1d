//! Unit-disk wireless medium with per-node FIFO interface queues.
//!
//! There is no MAC contention model: an interface sends one frame at a time,
//! a frame occupies it for `size * 8 / bitrate`, and every node within
//! `range` at the moment transmission starts receives it. Broadcasts are
//! additionally held back by a uniform jitter.

use std::collections::VecDeque;

use crate::mobility::MobilityModel;
use crate::packet::{NodeId, Packet};
use crate::sim::{RngStream, SimTime};

#[derive(Debug, Clone, PartialEq)]
pub struct LinkParams {
    /// Radio range in meters.
    pub range: f64,
    /// Bits per second.
    pub bitrate: u64,
    /// Interface queue capacity in packets.
    pub ifq_capacity: usize,
    /// Upper bound of broadcast jitter, seconds.
    pub broadcast_jitter_max: f64,
    /// Per-reception loss probability; zero disables losses.
    pub loss_prob: f64,
}

impl Default for LinkParams {
    fn default() -> Self {
        LinkParams {
            range: 250.0,
            bitrate: 2_000_000,
            ifq_capacity: 50,
            broadcast_jitter_max: 0.010,
            loss_prob: 0.0,
        }
    }
}

impl LinkParams {
    /// Serialization delay, rounded up to the next microsecond and never zero.
    pub fn tx_delay(&self, size_bytes: u32) -> SimTime {
        let bits = size_bytes as u64 * 8 * SimTime::MICROS_PER_SEC;
        SimTime::from_micros(bits.div_ceil(self.bitrate).max(1))
    }
}

#[derive(Debug, Copy, Clone, PartialEq, Eq)]
pub enum LinkMode {
    Broadcast,
    Unicast(NodeId),
}

#[derive(Debug, Clone)]
pub struct Frame {
    pub packet: Packet,
    pub mode: LinkMode,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EnqueueOutcome {
    Accepted,
    /// Queue full; the frame is handed back so the caller can trace the drop.
    Dropped,
}

/// Bounded FIFO interface queue.
#[derive(Debug, Default)]
pub struct InterfaceQueue {
    frames: VecDeque<Frame>,
    capacity: usize,
}

impl InterfaceQueue {
    pub fn new(capacity: usize) -> Self {
        InterfaceQueue {
            frames: VecDeque::with_capacity(capacity),
            capacity,
        }
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn enqueue(&mut self, frame: Frame) -> EnqueueOutcome {
        if self.frames.len() >= self.capacity {
            return EnqueueOutcome::Dropped;
        }
        self.frames.push_back(frame);
        EnqueueOutcome::Accepted
    }

    pub fn dequeue(&mut self) -> Option<Frame> {
        self.frames.pop_front()
    }
}

/// Result of putting one frame on the air.
#[derive(Debug, Clone, PartialEq)]
pub struct Transmission {
    /// Receivers and their reception times, ascending by node id.
    pub deliveries: Vec<(NodeId, SimTime)>,
    /// Receivers that lost the frame to the optional loss model.
    pub lost: Vec<NodeId>,
    /// Set when a unicast next hop was out of range; the time at which the
    /// sender learns of the failure.
    pub link_break_at: Option<SimTime>,
    /// When the interface becomes free again.
    pub busy_until: SimTime,
}

pub struct Medium {
    params: LinkParams,
    queues: Vec<InterfaceQueue>,
    busy: Vec<bool>,
    jitter: RngStream,
}

impl Medium {
    pub fn new(params: LinkParams, nodes: usize, jitter: RngStream) -> Self {
        Medium {
            queues: (0..nodes).map(|_| InterfaceQueue::new(params.ifq_capacity)).collect(),
            busy: vec![false; nodes],
            params,
            jitter,
        }
    }

    pub fn params(&self) -> &LinkParams {
        &self.params
    }

    pub fn queue(&self, node: NodeId) -> &InterfaceQueue {
        &self.queues[node as usize]
    }

    pub fn is_busy(&self, node: NodeId) -> bool {
        self.busy[node as usize]
    }

    pub fn enqueue(&mut self, node: NodeId, frame: Frame) -> EnqueueOutcome {
        self.queues[node as usize].enqueue(frame)
    }

    /// Takes the head-of-line frame if the interface is idle, marking it busy.
    pub fn start_next(&mut self, node: NodeId) -> Option<Frame> {
        if self.busy[node as usize] {
            return None;
        }
        let frame = self.queues[node as usize].dequeue()?;
        self.busy[node as usize] = true;
        Some(frame)
    }

    pub fn finish(&mut self, node: NodeId) {
        self.busy[node as usize] = false;
    }

    /// Puts `frame` on the air from `sender` at `now`. Connectivity is
    /// sampled once, at `now`.
    pub fn transmit(&mut self, mobility: &MobilityModel, sender: NodeId, frame: &Frame, now: SimTime) -> Transmission {
        let tx = self.params.tx_delay(frame.packet.size);
        match frame.mode {
            LinkMode::Broadcast => {
                let jitter = SimTime::from_secs_f64(self.jitter.uniform(0.0, self.params.broadcast_jitter_max));
                let at = now + jitter + tx;
                let mut deliveries = Vec::new();
                let mut lost = Vec::new();
                for n in mobility.neighbors(sender, now, self.params.range) {
                    if self.jitter.chance(self.params.loss_prob) {
                        lost.push(n);
                    } else {
                        deliveries.push((n, at));
                    }
                }
                Transmission {
                    deliveries,
                    lost,
                    link_break_at: None,
                    busy_until: at,
                }
            }
            LinkMode::Unicast(next) => {
                let at = now + tx;
                let mut t = Transmission {
                    deliveries: Vec::new(),
                    lost: Vec::new(),
                    link_break_at: None,
                    busy_until: at,
                };
                if next == sender || !mobility.in_range(sender, next, now, self.params.range) {
                    t.link_break_at = Some(at);
                } else if self.jitter.chance(self.params.loss_prob) {
                    t.lost.push(next);
                } else {
                    t.deliveries.push((next, at));
                }
                t
            }
        }
    }
}
