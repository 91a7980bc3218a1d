use std::fmt;
use std::str::FromStr;

use crate::sim::SimTime;

pub type NodeId = u32;

/// Port used by routing control packets.
pub const ROUTING_PORT: u16 = 255;

/// Transport 4-tuple identifying a flow.
#[derive(Debug, Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FlowId {
    pub src: NodeId,
    pub dst: NodeId,
    pub src_port: u16,
    pub dst_port: u16,
}

impl FlowId {
    pub fn new(src: NodeId, dst: NodeId, src_port: u16, dst_port: u16) -> Self {
        FlowId {
            src,
            dst,
            src_port,
            dst_port,
        }
    }

    pub fn control(src: NodeId, dst: NodeId) -> Self {
        Self::new(src, dst, ROUTING_PORT, ROUTING_PORT)
    }

    pub fn reversed(self) -> Self {
        FlowId::new(self.dst, self.src, self.dst_port, self.src_port)
    }
}

#[derive(Debug, Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PacketKind {
    Cbr,
    Tcp,
    Ack,
    Rreq,
    Rrep,
    Rerr,
}

impl PacketKind {
    pub const ALL: [PacketKind; 6] = [
        PacketKind::Cbr,
        PacketKind::Tcp,
        PacketKind::Ack,
        PacketKind::Rreq,
        PacketKind::Rrep,
        PacketKind::Rerr,
    ];

    /// Application payload: CBR datagrams and reliable-transport segments.
    pub fn is_data(self) -> bool {
        matches!(self, PacketKind::Cbr | PacketKind::Tcp)
    }

    /// Anything the routing layer carries end-to-end on behalf of transport.
    pub fn is_transport(self) -> bool {
        matches!(self, PacketKind::Cbr | PacketKind::Tcp | PacketKind::Ack)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PacketKind::Cbr => "cbr",
            PacketKind::Tcp => "tcp",
            PacketKind::Ack => "ack",
            PacketKind::Rreq => "rreq",
            PacketKind::Rrep => "rrep",
            PacketKind::Rerr => "rerr",
        }
    }
}

impl fmt::Display for PacketKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PacketKind {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        PacketKind::ALL.into_iter().find(|k| k.as_str() == s).ok_or(())
    }
}

/// Protocol-specific control headers.
#[derive(Debug, Clone, PartialEq)]
pub enum Control {
    AodvRreq {
        originator: NodeId,
        originator_seqno: u32,
        request_id: u32,
        dest: NodeId,
        /// 0 when the originator has never learned one.
        dest_seqno: u32,
        hop_count: u32,
    },
    AodvRrep {
        originator: NodeId,
        dest: NodeId,
        dest_seqno: u32,
        hop_count: u32,
    },
    AodvRerr {
        unreachable: Vec<(NodeId, u32)>,
    },
    DsrRreq {
        originator: NodeId,
        target: NodeId,
        request_id: u32,
    },
    DsrRrep {
        /// Complete path originator .. target.
        route: Vec<NodeId>,
    },
    DsrRerr {
        broken_from: NodeId,
        broken_to: NodeId,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Packet {
    pub uid: u64,
    pub flow: FlowId,
    pub seqno: u64,
    pub kind: PacketKind,
    /// Bytes on the wire, headers included.
    pub size: u32,
    /// Application payload bytes (what AGT records report).
    pub payload: u32,
    pub ttl: u32,
    pub source_route: Option<Vec<NodeId>>,
    pub rreq_record: Option<Vec<NodeId>>,
    pub control: Option<Control>,
    /// When the originating agent created the packet.
    pub timestamp: Option<SimTime>,
}

impl Packet {
    pub fn new(uid: u64, flow: FlowId, seqno: u64, kind: PacketKind, payload: u32) -> Self {
        Packet {
            uid,
            flow,
            seqno,
            kind,
            size: payload,
            payload,
            ttl: DEFAULT_DATA_TTL,
            source_route: None,
            rreq_record: None,
            control: None,
            timestamp: None,
        }
    }
}

pub const DEFAULT_DATA_TTL: u32 = 32;

/// Fixed IP-style header charged to every routed packet.
pub const IP_HEADER_BYTES: u32 = 20;
/// Per-hop cost of a source-route header entry.
pub const SOURCE_ROUTE_ENTRY_BYTES: u32 = 4;

/// Wire size of a data packet carrying a source route of `route_len` nodes.
pub fn source_routed_size(payload: u32, route_len: usize) -> u32 {
    payload + IP_HEADER_BYTES + SOURCE_ROUTE_ENTRY_BYTES * route_len as u32
}

/// Wire size of a destination-addressed (hop-by-hop routed) data packet.
pub fn hop_by_hop_size(payload: u32) -> u32 {
    payload + IP_HEADER_BYTES
}

/// True if `path` visits no node twice.
pub fn is_simple_path(path: &[NodeId]) -> bool {
    let mut seen = std::collections::HashSet::with_capacity(path.len());
    path.iter().all(|n| seen.insert(*n))
}
