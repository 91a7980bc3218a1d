use std::fmt;
use std::fmt::Write as _;

use super::{AnalysisError, Band, Metric, SweepKind};
use crate::routing::Protocol;
use crate::traffic::TrafficKind;

/// Node density standing in for "mobility": the sparsest grid density is
/// low mobility, the densest is high.
#[derive(Debug, Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mobility {
    Low,
    High,
}

#[derive(Debug, Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Level {
    Low,
    High,
}

#[derive(Debug, Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Regime {
    pub mobility: Mobility,
    pub sweep: SweepKind,
    pub level: Level,
}

impl Regime {
    /// The eight regimes in presentation order.
    pub const ALL: [Regime; 8] = {
        const fn r(mobility: Mobility, sweep: SweepKind, level: Level) -> Regime {
            Regime { mobility, sweep, level }
        }
        use Level as L;
        use Mobility as M;
        use SweepKind as S;
        [
            r(M::Low, S::Pause, L::Low),
            r(M::Low, S::Pause, L::High),
            r(M::Low, S::Speed, L::Low),
            r(M::Low, S::Speed, L::High),
            r(M::High, S::Pause, L::Low),
            r(M::High, S::Pause, L::High),
            r(M::High, S::Speed, L::Low),
            r(M::High, S::Speed, L::High),
        ]
    };

    /// Stable identifier, e.g. `low-mobility/high-pause`.
    pub fn id(self) -> String {
        format!(
            "{}-mobility/{}-{}",
            level_word(self.mobility == Mobility::High),
            level_word(self.level == Level::High),
            self.sweep
        )
    }

    pub fn title(self) -> String {
        let m = if self.mobility == Mobility::High { "HIGH" } else { "LOW" };
        let l = if self.level == Level::High { "HIGH" } else { "LOW" };
        let axis = match self.sweep {
            SweepKind::Pause => "PAUSE TIME",
            SweepKind::Speed => "SPEED",
        };
        format!("{m} MOBILITY & {l} {axis}")
    }
}

fn level_word(high: bool) -> &'static str {
    if high {
        "high"
    } else {
        "low"
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

#[derive(Debug, Copy, Clone, PartialEq, Eq)]
pub struct DecisionCell {
    pub protocol: Protocol,
    pub traffic: TrafficKind,
    pub metric: Metric,
    pub band: Band,
}

/// Column order: each metric split into TCP then CBR.
const COLUMNS: [(Metric, TrafficKind); 6] = [
    (Metric::Pdr, TrafficKind::Tcp),
    (Metric::Pdr, TrafficKind::Cbr),
    (Metric::E2e, TrafficKind::Tcp),
    (Metric::E2e, TrafficKind::Cbr),
    (Metric::Lpr, TrafficKind::Tcp),
    (Metric::Lpr, TrafficKind::Cbr),
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecisionTable {
    pub regime: Regime,
    /// One row per protocol (AODV, DSR), columns as in [`COLUMNS`].
    pub rows: Vec<(Protocol, [Band; 6])>,
}

impl DecisionTable {
    pub fn band(&self, protocol: Protocol, traffic: TrafficKind, metric: Metric) -> Band {
        let col = COLUMNS
            .iter()
            .position(|&c| c == (metric, traffic))
            .expect("every (metric, traffic) has a column");
        self.rows
            .iter()
            .find(|(p, _)| *p == protocol)
            .map(|(_, bands)| bands[col])
            .expect("every protocol has a row")
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{} FOR TCP & CBR CONNECTIONS", self.regime.title()).unwrap();
        writeln!(
            out,
            "{:<10}{:<22}{:<22}Loss Packet Ratio",
            "", "Packet Delivery Ratio", "Avg. End to End Delay"
        )
        .unwrap();
        write!(out, "{:<10}", "Protocol").unwrap();
        for _ in 0..3 {
            write!(out, "{:<11}{:<11}", "TCP", "CBR").unwrap();
        }
        out.truncate(out.trim_end().len());
        out.push('\n');
        for (protocol, bands) in &self.rows {
            write!(out, "{:<10}", protocol.label()).unwrap();
            for b in bands {
                write!(out, "{:<11}", b.short()).unwrap();
            }
            out.truncate(out.trim_end().len());
            out.push('\n');
        }
        out
    }
}

/// Assembles the two-row table for `regime`. Every (protocol, traffic,
/// metric) must be present; if a combination appears twice the later cell wins.
pub fn build_decision_table(cells: &[DecisionCell], regime: Regime) -> Result<DecisionTable, AnalysisError> {
    let mut rows = Vec::new();
    let mut missing = Vec::new();
    for protocol in Protocol::ALL {
        let mut bands = [Band::Low; 6];
        for (col, &(metric, traffic)) in COLUMNS.iter().enumerate() {
            let found = cells
                .iter()
                .rev()
                .find(|c| c.protocol == protocol && c.traffic == traffic && c.metric == metric);
            match found {
                Some(c) => bands[col] = c.band,
                None => missing.push((protocol, traffic, metric)),
            }
        }
        rows.push((protocol, bands));
    }
    if !missing.is_empty() {
        missing.sort();
        return Err(AnalysisError::IncompleteTable {
            regime: regime.id(),
            missing,
        });
    }
    Ok(DecisionTable { regime, rows })
}

pub fn render_tables_text(tables: &[DecisionTable]) -> String {
    tables
        .iter()
        .map(DecisionTable::render_text)
        .collect::<Vec<_>>()
        .join("\n")
}

/// One CSV row per (regime, protocol).
pub fn render_tables_csv(tables: &[DecisionTable]) -> String {
    let mut out = String::from("regime,protocol,pdr_tcp,pdr_cbr,e2e_tcp,e2e_cbr,lpr_tcp,lpr_cbr\n");
    for t in tables {
        for (protocol, bands) in &t.rows {
            write!(out, "{},{}", t.regime.id(), protocol.label()).unwrap();
            for b in bands {
                write!(out, ",{}", b.short()).unwrap();
            }
            out.push('\n');
        }
    }
    out
}
