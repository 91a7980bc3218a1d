//! Trace-driven metrics: delivery ratio, loss ratio and end-to-end delay,
//! plus band classification and decision tables.

mod classify;
mod table;

use std::collections::HashMap;

use thiserror::Error;

use crate::packet::{FlowId, PacketKind};
use crate::routing::Protocol;
use crate::sim::SimTime;
use crate::trace::{Layer, TraceEvent, TraceRecord};
use crate::traffic::TrafficKind;

pub use classify::{band_for, classify, Band, Bands, Metric, SweepKind};
pub use table::{
    build_decision_table, render_tables_csv, render_tables_text, DecisionCell, DecisionTable, Level, Mobility, Regime,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("no {0} packets were sent; delivery ratios are undefined")]
    NoTraffic(TrafficKind),
    #[error("{n_received} {kind} packets received but only {n_sent} sent")]
    Inconsistent {
        kind: TrafficKind,
        n_sent: u64,
        n_received: u64,
    },
    #[error("decision table `{regime}` is missing {}", describe_missing(.missing))]
    IncompleteTable {
        regime: String,
        missing: Vec<(Protocol, TrafficKind, Metric)>,
    },
}

fn describe_missing(missing: &[(Protocol, TrafficKind, Metric)]) -> String {
    missing
        .iter()
        .map(|(p, t, m)| format!("({}, {}, {})", p.label(), t.label(), m.label()))
        .collect::<Vec<_>>()
        .join(", ")
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub n_sent: u64,
    pub n_received: u64,
    pub pdr: f64,
    pub lpr: f64,
    pub avg_e2e_ms: f64,
    /// Packets that contributed a delay sample.
    pub delay_count: u64,
}

impl MetricsReport {
    /// Builds a report from raw counts. `total_delay_us` is the summed delay
    /// of the `delay_count` samples.
    ///
    /// PDR and LPR come out of the same two counts, and whichever is at least
    /// 50 is computed directly while the other is its complement; that
    /// subtraction is exact in binary floating point, so `pdr + lpr == 100.0`
    /// holds bit for bit.
    pub fn from_counts(
        kind: TrafficKind,
        n_sent: u64,
        n_received: u64,
        total_delay_us: u64,
        delay_count: u64,
    ) -> Result<Self, AnalysisError> {
        if n_sent == 0 {
            return Err(AnalysisError::NoTraffic(kind));
        }
        if n_received > n_sent {
            return Err(AnalysisError::Inconsistent {
                kind,
                n_sent,
                n_received,
            });
        }
        let ratio = |n: u64| (n as f64 * 100.0) / n_sent as f64;
        let (pdr, lpr) = if 2 * n_received >= n_sent {
            let pdr = ratio(n_received);
            (pdr, 100.0 - pdr)
        } else {
            let lpr = ratio(n_sent - n_received);
            (100.0 - lpr, lpr)
        };
        let avg_e2e_ms = if delay_count == 0 {
            0.0
        } else {
            total_delay_us as f64 / (delay_count as f64 * 1000.0)
        };
        Ok(MetricsReport {
            n_sent,
            n_received,
            pdr,
            lpr,
            avg_e2e_ms,
            delay_count,
        })
    }
}

fn is_agent(r: &TraceRecord, event: TraceEvent, kind: PacketKind) -> bool {
    r.layer == Layer::Agt && r.event == event && r.pkt_type == kind
}

/// Counts agent-level sends and receptions of `data_type` and averages the
/// delay between the first send and the first later reception of every
/// `(flow, seqno)`.
pub fn compute_metrics(records: &[TraceRecord], data_type: TrafficKind) -> Result<MetricsReport, AnalysisError> {
    let kind = data_type.data_kind();
    let mut n_sent = 0u64;
    let mut n_received = 0u64;
    // None once the delay for that key has been taken
    let mut started: HashMap<(FlowId, u64), Option<SimTime>> = HashMap::new();
    let mut total_us = 0u64;
    let mut delay_count = 0u64;
    for r in records {
        if is_agent(r, TraceEvent::Send, kind) {
            n_sent += 1;
            started.entry((r.flow, r.seqno)).or_insert(Some(r.time));
        } else if is_agent(r, TraceEvent::Recv, kind) {
            n_received += 1;
            if let Some(slot) = started.get_mut(&(r.flow, r.seqno)) {
                if let Some(sent) = slot.take() {
                    total_us += (r.time - sent).as_micros();
                    delay_count += 1;
                }
            }
        }
    }
    MetricsReport::from_counts(data_type, n_sent, n_received, total_us, delay_count)
}

/// The awk-style analysis, quirks included:
///
/// * sent and received counts look at the agent layer only and ignore the
///   packet type;
/// * start and end times are indexed by seqno alone, so flows sharing a
///   seqno overwrite each other;
/// * the end time is taken from a reception at any layer, and a drop of the
///   same seqno at any layer erases it;
/// * every seqno from 0 to the highest sent one with an end time counts
///   toward the average, but only positive delays are summed.
pub fn compute_metrics_script_compat(
    records: &[TraceRecord],
    data_type: TrafficKind,
) -> Result<MetricsReport, AnalysisError> {
    let kind = data_type.data_kind();
    let mut n_sent = 0u64;
    let mut n_received = 0u64;
    let mut max_seq: Option<u64> = None;
    let mut start: HashMap<u64, i64> = HashMap::new();
    let mut end: HashMap<u64, i64> = HashMap::new();
    for r in records {
        let t = r.time.as_micros() as i64;
        let agent_send = r.layer == Layer::Agt && r.event == TraceEvent::Send;
        if agent_send {
            n_sent += 1;
            max_seq = Some(max_seq.map_or(r.seqno, |m| m.max(r.seqno)));
            start.insert(r.seqno, t);
        } else if r.pkt_type == kind && r.event == TraceEvent::Recv {
            end.insert(r.seqno, t);
        } else if r.pkt_type == kind && r.event == TraceEvent::Drop {
            end.insert(r.seqno, -1);
        }
        if r.layer == Layer::Agt && r.event == TraceEvent::Recv {
            n_received += 1;
        }
    }
    let mut count = 0u64;
    let mut total_us = 0u64;
    if let Some(max) = max_seq {
        for x in 0..=max {
            let e = end.get(&x).copied().unwrap_or(0);
            if e > 0 {
                count += 1;
                let delay = e - start.get(&x).copied().unwrap_or(0);
                if delay > 0 {
                    total_us += delay as u64;
                }
            }
        }
    }
    MetricsReport::from_counts(data_type, n_sent, n_received, total_us, count)
}
