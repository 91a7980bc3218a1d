use std::fmt;
use std::str::FromStr;

use super::MetricsReport;

#[derive(Debug, Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Band {
    Low,
    Average,
    High,
}

impl Band {
    /// Short form used in rendered tables.
    pub fn short(self) -> &'static str {
        match self {
            Band::Low => "Low",
            Band::Average => "Avg",
            Band::High => "High",
        }
    }

    /// Number of bands between `self` and `other`.
    pub fn distance(self, other: Band) -> u32 {
        (self as i32 - other as i32).unsigned_abs()
    }
}

impl fmt::Display for Band {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short())
    }
}

impl FromStr for Band {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "Low" => Ok(Band::Low),
            "Avg" | "Average" => Ok(Band::Average),
            "High" => Ok(Band::High),
            _ => Err(format!("unknown band {s:?}")),
        }
    }
}

#[derive(Debug, Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Metric {
    Pdr,
    E2e,
    Lpr,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Pdr, Metric::E2e, Metric::Lpr];

    pub fn label(self) -> &'static str {
        match self {
            Metric::Pdr => "PDR",
            Metric::E2e => "E2E",
            Metric::Lpr => "LPR",
        }
    }
}

/// Which parameter a sweep varies; the delay and loss thresholds differ.
#[derive(Debug, Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SweepKind {
    Pause,
    Speed,
}

impl SweepKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepKind::Pause => "pause",
            SweepKind::Speed => "speed",
        }
    }
}

impl fmt::Display for SweepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "pause" => Ok(SweepKind::Pause),
            "speed" => Ok(SweepKind::Speed),
            _ => Err(format!("unknown sweep axis {s:?} (expected pause or speed)")),
        }
    }
}

/// Lower edges of Average and High. `closed_average` selects whether the
/// Average band includes its upper edge (LPR) or not (PDR, delay).
struct Edges {
    average: f64,
    high: f64,
    closed_average: bool,
}

fn edges(metric: Metric, sweep: SweepKind) -> Edges {
    match (metric, sweep) {
        (Metric::Pdr, _) => Edges {
            average: 96.0,
            high: 98.0,
            closed_average: false,
        },
        (Metric::E2e, SweepKind::Pause) => Edges {
            average: 151.0,
            high: 351.0,
            closed_average: false,
        },
        (Metric::E2e, SweepKind::Speed) => Edges {
            average: 51.0,
            high: 150.0,
            closed_average: false,
        },
        (Metric::Lpr, SweepKind::Pause) => Edges {
            average: 1.0,
            high: 2.0,
            closed_average: true,
        },
        (Metric::Lpr, SweepKind::Speed) => Edges {
            average: 1.5,
            high: 3.0,
            closed_average: true,
        },
    }
}

/// Band of a single metric value. Delay is in milliseconds, ratios in
/// percent. Total and monotone in `value`; NaN classifies as Low.
pub fn band_for(metric: Metric, sweep: SweepKind, value: f64) -> Band {
    let e = edges(metric, sweep);
    let high = if e.closed_average {
        value > e.high
    } else {
        value >= e.high
    };
    if high {
        Band::High
    } else if value >= e.average {
        Band::Average
    } else {
        Band::Low
    }
}

#[derive(Debug, Copy, Clone, PartialEq, Eq)]
pub struct Bands {
    pub pdr: Band,
    pub e2e: Band,
    pub lpr: Band,
}

impl Bands {
    pub fn get(&self, metric: Metric) -> Band {
        match metric {
            Metric::Pdr => self.pdr,
            Metric::E2e => self.e2e,
            Metric::Lpr => self.lpr,
        }
    }
}

pub fn classify(report: &MetricsReport, sweep: SweepKind) -> Bands {
    Bands {
        pdr: band_for(Metric::Pdr, sweep, report.pdr),
        e2e: band_for(Metric::E2e, sweep, report.avg_e2e_ms),
        lpr: band_for(Metric::Lpr, sweep, report.lpr),
    }
}
