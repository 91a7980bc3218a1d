//! Line-oriented trace format.
//!
//! ```text
//! s 1.000000000 _3_ AGT --- 7 cbr 512 [1:0 5:0]
//! ```
//!
//! Whitespace-separated columns: event, time, node, layer, `---`, seqno,
//! packet type, size, flow. An awk script addressing `$1`, `$2`, `$4`, `$6`
//! and `$7` sees event, time, layer, seqno and type.

use std::fmt;
use std::io::{self, BufRead, Write};
use std::str::FromStr;

use thiserror::Error;

use crate::packet::{FlowId, NodeId, PacketKind};
use crate::sim::SimTime;

#[derive(Debug, Copy, Clone, PartialEq, Eq, Hash)]
pub enum TraceEvent {
    Send,
    Recv,
    Drop,
    Forward,
}

impl TraceEvent {
    pub fn as_str(self) -> &'static str {
        match self {
            TraceEvent::Send => "s",
            TraceEvent::Recv => "r",
            TraceEvent::Drop => "D",
            TraceEvent::Forward => "f",
        }
    }
}

impl FromStr for TraceEvent {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "s" => Ok(TraceEvent::Send),
            "r" => Ok(TraceEvent::Recv),
            "D" => Ok(TraceEvent::Drop),
            "f" => Ok(TraceEvent::Forward),
            _ => Err(()),
        }
    }
}

#[derive(Debug, Copy, Clone, PartialEq, Eq, Hash)]
pub enum Layer {
    Agt,
    Rtr,
    Mac,
}

impl Layer {
    pub fn as_str(self) -> &'static str {
        match self {
            Layer::Agt => "AGT",
            Layer::Rtr => "RTR",
            Layer::Mac => "MAC",
        }
    }
}

impl FromStr for Layer {
    type Err = ();
    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "AGT" => Ok(Layer::Agt),
            "RTR" => Ok(Layer::Rtr),
            "MAC" => Ok(Layer::Mac),
            _ => Err(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceRecord {
    pub event: TraceEvent,
    pub time: SimTime,
    pub node: NodeId,
    pub layer: Layer,
    pub seqno: u64,
    pub pkt_type: PacketKind,
    pub size: u32,
    pub flow: FlowId,
}

impl fmt::Display for TraceRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} _{}_ {} --- {} {} {} [{}:{} {}:{}]",
            self.event.as_str(),
            self.time,
            self.node,
            self.layer.as_str(),
            self.seqno,
            self.pkt_type,
            self.size,
            self.flow.src,
            self.flow.src_port,
            self.flow.dst,
            self.flow.dst_port
        )
    }
}

/// Serializes one record, without the trailing newline.
pub fn emit(record: &TraceRecord) -> String {
    record.to_string()
}

pub fn write_trace<W: Write>(mut out: W, records: &[TraceRecord]) -> io::Result<()> {
    for r in records {
        writeln!(out, "{r}")?;
    }
    out.flush()
}

const FIELD_NAMES: [&str; 10] = [
    "event",
    "time",
    "node",
    "layer",
    "separator",
    "seqno",
    "type",
    "size",
    "flow source",
    "flow destination",
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LineError {
    #[error("missing field `{0}`")]
    MissingField(&'static str),
    #[error("unexpected trailing field {0:?}")]
    ExtraField(String),
    #[error("empty `{0}` field (columns are separated by exactly one space)")]
    EmptyField(&'static str),
    #[error("invalid {field} {value:?}: {reason}")]
    Invalid {
        field: &'static str,
        value: String,
        reason: &'static str,
    },
}

fn invalid(field: &'static str, value: &str, reason: &'static str) -> LineError {
    LineError::Invalid {
        field,
        value: value.to_string(),
        reason,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraceError {
    #[error("trace line {line}: {source}")]
    Line { line: usize, source: LineError },
    #[error("trace line {line}: time {time} precedes the previous record's {previous}")]
    TimeRegression {
        line: usize,
        time: SimTime,
        previous: SimTime,
    },
    #[error("trace read failed: {0}")]
    Io(String),
}

impl TraceError {
    pub fn line(&self) -> Option<usize> {
        match self {
            TraceError::Line { line, .. } | TraceError::TimeRegression { line, .. } => Some(*line),
            TraceError::Io(_) => None,
        }
    }
}

fn parse_time(s: &str) -> Result<SimTime, LineError> {
    let bad = |reason| invalid("time", s, reason);
    let (whole, frac) = s.split_once('.').ok_or_else(|| bad("expected <seconds>.<9 digits>"))?;
    if whole.is_empty() || !whole.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad("seconds must be unsigned decimal digits"));
    }
    if frac.len() != 9 || !frac.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad("expected exactly 9 fractional digits"));
    }
    let secs: u64 = whole.parse().map_err(|_| bad("seconds out of range"))?;
    let nanos: u64 = frac.parse().expect("digits");
    if !nanos.is_multiple_of(1_000) {
        return Err(bad("finer than microsecond resolution"));
    }
    secs.checked_mul(SimTime::MICROS_PER_SEC)
        .and_then(|us| us.checked_add(nanos / 1_000))
        .map(SimTime::from_micros)
        .ok_or_else(|| bad("seconds out of range"))
}

fn parse_unsigned<T: FromStr>(field: &'static str, s: &str) -> Result<T, LineError> {
    if s.starts_with('-') {
        return Err(invalid(field, s, "must not be negative"));
    }
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return Err(invalid(field, s, "expected unsigned decimal integer"));
    }
    s.parse().map_err(|_| invalid(field, s, "out of range"))
}

fn parse_endpoint(field: &'static str, s: &str) -> Result<(NodeId, u16), LineError> {
    let (node, port) = s
        .split_once(':')
        .ok_or_else(|| invalid(field, s, "expected <node>:<port>"))?;
    Ok((parse_unsigned(field, node)?, parse_unsigned(field, port)?))
}

/// Parses a single line (no trailing newline) into a record.
pub fn parse_line(line: &str) -> Result<TraceRecord, LineError> {
    if line.is_empty() {
        return Err(LineError::MissingField(FIELD_NAMES[0]));
    }
    let fields: Vec<&str> = line.split(' ').collect();
    if let Some(pos) = fields.iter().position(|f| f.is_empty()) {
        return Err(match FIELD_NAMES.get(pos) {
            Some(name) => LineError::EmptyField(name),
            None => LineError::ExtraField(String::new()),
        });
    }
    if fields.len() < FIELD_NAMES.len() {
        return Err(LineError::MissingField(FIELD_NAMES[fields.len()]));
    }
    if fields.len() > FIELD_NAMES.len() {
        return Err(LineError::ExtraField(fields[FIELD_NAMES.len()].to_string()));
    }

    let event = fields[0]
        .parse()
        .map_err(|_| invalid("event", fields[0], "expected one of s, r, D, f"))?;
    let time = parse_time(fields[1])?;
    let node = fields[2]
        .strip_prefix('_')
        .and_then(|s| s.strip_suffix('_'))
        .ok_or_else(|| invalid("node", fields[2], "expected _<id>_"))?;
    let node = parse_unsigned("node", node)?;
    let layer = fields[3]
        .parse()
        .map_err(|_| invalid("layer", fields[3], "expected AGT, RTR or MAC"))?;
    if fields[4] != "---" {
        return Err(invalid("separator", fields[4], "expected ---"));
    }
    let seqno = parse_unsigned("seqno", fields[5])?;
    let pkt_type = fields[6]
        .parse()
        .map_err(|_| invalid("type", fields[6], "expected cbr, tcp, ack, rreq, rrep or rerr"))?;
    let size = parse_unsigned("size", fields[7])?;
    let src = fields[8]
        .strip_prefix('[')
        .ok_or_else(|| invalid("flow source", fields[8], "expected [<node>:<port>"))?;
    let dst = fields[9]
        .strip_suffix(']')
        .ok_or_else(|| invalid("flow destination", fields[9], "expected <node>:<port>]"))?;
    let (src, src_port) = parse_endpoint("flow source", src)?;
    let (dst, dst_port) = parse_endpoint("flow destination", dst)?;

    Ok(TraceRecord {
        event,
        time,
        node,
        layer,
        seqno,
        pkt_type,
        size,
        flow: FlowId::new(src, dst, src_port, dst_port),
    })
}

/// Parses a full trace, checking that times never go backwards.
/// Line numbers in errors are 1-based.
pub fn parse_trace(text: &str) -> Result<Vec<TraceRecord>, TraceError> {
    let mut records = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        push_line(&mut records, idx + 1, line)?;
    }
    Ok(records)
}

pub fn read_trace<R: BufRead>(reader: R) -> Result<Vec<TraceRecord>, TraceError> {
    let mut records = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| TraceError::Io(e.to_string()))?;
        push_line(&mut records, idx + 1, &line)?;
    }
    Ok(records)
}

fn push_line(records: &mut Vec<TraceRecord>, line_no: usize, line: &str) -> Result<(), TraceError> {
    let record = parse_line(line).map_err(|source| TraceError::Line { line: line_no, source })?;
    if let Some(prev) = records.last() {
        if record.time < prev.time {
            return Err(TraceError::TimeRegression {
                line: line_no,
                time: record.time,
                previous: prev.time,
            });
        }
    }
    records.push(record);
    Ok(())
}
