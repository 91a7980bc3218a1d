//! Single runs and parameter sweeps.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::analysis::{
    build_decision_table, classify, compute_metrics, render_tables_csv, render_tables_text, AnalysisError,
    DecisionCell, DecisionTable, Level, Metric, MetricsReport, Mobility, Regime, SweepKind,
};
use crate::config::{key_values, ScenarioConfig};
use crate::error::{ConfigError, RunError};
use crate::mobility::MobilityModel;
use crate::network::{NetworkSetup, Simulation};
use crate::routing::Protocol;
use crate::sim::{RngStream, StreamLabel};
use crate::trace::{write_trace, TraceRecord};
use crate::traffic::{generate_flows, TrafficKind};

/// Motion depends only on the seed and the mobility-related fields, never
/// on the protocol or traffic, so paired runs see identical schedules.
pub fn build_mobility(config: &ScenarioConfig) -> MobilityModel {
    let mut motion = RngStream::new(config.seed, StreamLabel::Mobility);
    let mut topology = RngStream::new(config.seed, StreamLabel::Topology);
    MobilityModel::random_waypoint(
        config.nodes,
        &config.waypoint(),
        config.placement(),
        config.end_time(),
        &mut motion,
        &mut topology,
    )
}

/// Builds the simulation for `config` without running it.
pub fn build_simulation(config: &ScenarioConfig) -> Result<Simulation, ConfigError> {
    config.validate()?;
    let traffic = config.traffic_params();
    let mut rng = RngStream::new(config.seed, StreamLabel::Traffic);
    let flows = generate_flows(
        config.nodes,
        config.connections,
        config.traffic,
        &traffic,
        config.end_time(),
        &mut rng,
    );
    let setup = NetworkSetup {
        protocol: config.protocol,
        routing: config.routing_params(),
        link: config.link_params(),
        traffic,
        flows,
        end: config.end_time(),
        seed: config.seed,
    };
    Ok(Simulation::new(setup, build_mobility(config)))
}

/// Runs `config` to completion in memory and returns the trace.
pub fn simulate(config: &ScenarioConfig) -> Result<Vec<TraceRecord>, ConfigError> {
    let mut sim = build_simulation(config)?;
    sim.run();
    Ok(sim.into_trace())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub trace_path: PathBuf,
    pub schedule_path: PathBuf,
    pub report: MetricsReport,
}

fn write_file(path: &Path, write: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<(), RunError> {
    let err = |source| RunError::Write {
        path: path.to_path_buf(),
        source,
    };
    let mut w = BufWriter::new(File::create(path).map_err(err)?);
    write(&mut w).map_err(err)
}

fn create_dir(dir: &Path) -> Result<(), RunError> {
    fs::create_dir_all(dir).map_err(|source| RunError::Write {
        path: dir.to_path_buf(),
        source,
    })
}

/// Runs one scenario, writing `<id>.tr` (trace) and `<id>.mob` (motion
/// schedule) into `out_dir`, and analyzes the trace.
pub fn run_scenario(config: &ScenarioConfig, out_dir: &Path) -> Result<RunOutput, RunError> {
    let records = simulate(config)?;
    create_dir(out_dir)?;
    let id = config.scenario_id();
    let trace_path = out_dir.join(format!("{id}.tr"));
    let schedule_path = out_dir.join(format!("{id}.mob"));
    write_file(&trace_path, |w| write_trace(w, &records))?;
    let schedule = build_mobility(config).export_schedule();
    write_file(&schedule_path, |w| std::io::Write::write_all(w, schedule.as_bytes()))?;
    let report = compute_metrics(&records, config.traffic)?;
    Ok(RunOutput {
        trace_path,
        schedule_path,
        report,
    })
}

/// One grid point; every seed of a cell shares everything but the seed.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub axis: SweepKind,
    pub protocol: Protocol,
    pub traffic: TrafficKind,
    pub nodes: usize,
    pub pause: f64,
    pub speed: f64,
}

impl SweepCell {
    pub fn id(&self) -> String {
        format!(
            "{}-{}-{}-n{}-p{}-v{}",
            self.axis, self.protocol, self.traffic, self.nodes, self.pause, self.speed
        )
    }

    pub fn config(&self, base: &ScenarioConfig, seed: u64) -> ScenarioConfig {
        ScenarioConfig {
            protocol: self.protocol,
            traffic: self.traffic,
            nodes: self.nodes,
            pause: self.pause,
            v_max: self.speed,
            seed,
            ..base.clone()
        }
    }

    /// The swept parameter's value.
    pub fn value(&self) -> f64 {
        match self.axis {
            SweepKind::Pause => self.pause,
            SweepKind::Speed => self.speed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub axes: Vec<SweepKind>,
    pub nodes: Vec<usize>,
    pub pause_values: Vec<f64>,
    pub speed_values: Vec<f64>,
    /// Speed used while pause varies.
    pub pinned_speed: f64,
    /// Pause used while speed varies.
    pub pinned_pause: f64,
    pub protocols: Vec<Protocol>,
    pub traffic: Vec<TrafficKind>,
    pub seeds: Vec<u64>,
    /// Write every run's trace under `traces/`.
    pub keep_traces: bool,
    /// Settings shared by every run.
    pub base: ScenarioConfig,
}

impl Default for SweepGrid {
    fn default() -> Self {
        SweepGrid {
            axes: vec![SweepKind::Pause, SweepKind::Speed],
            nodes: vec![30, 90, 150],
            pause_values: vec![50.0, 100.0, 150.0, 200.0, 250.0],
            speed_values: vec![5.0, 10.0, 15.0, 20.0, 25.0],
            pinned_speed: 15.0,
            pinned_pause: 50.0,
            protocols: Protocol::ALL.to_vec(),
            traffic: TrafficKind::ALL.to_vec(),
            seeds: (1..=5).collect(),
            keep_traces: true,
            base: ScenarioConfig::default(),
        }
    }
}

fn parse_list<T: std::str::FromStr>(line: usize, key: &str, value: &str) -> Result<Vec<T>, ConfigError>
where
    T::Err: ToString,
{
    let items: Result<Vec<T>, _> = value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::parse)
        .collect();
    let bad = |reason: String| ConfigError::BadValue {
        line,
        key: key.to_string(),
        value: value.to_string(),
        reason,
    };
    let items = items.map_err(|e| bad(e.to_string()))?;
    if items.is_empty() {
        return Err(bad("empty list".into()));
    }
    Ok(items)
}

impl SweepGrid {
    /// Parses grid text on top of [`SweepGrid::default`]. Grid keys:
    /// `axis` (pause, speed or both), `nodes`, `pause_values`,
    /// `speed_values`, `pinned_speed`, `pinned_pause`, `protocols`,
    /// `traffic`, `seeds` (count), `base_seed`, `keep_traces`. Any other key
    /// is a scenario setting applied to every run.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut grid = SweepGrid::default();
        let mut seeds = grid.seeds.len() as u64;
        let mut base_seed = 1u64;
        let mut seen = BTreeSet::new();
        for (key, value, line) in key_values(text)? {
            let bad = |reason: &str| ConfigError::BadValue {
                line,
                key: key.to_string(),
                value: value.to_string(),
                reason: reason.to_string(),
            };
            if !seen.insert(key.to_string()) {
                return Err(bad("key given twice"));
            }
            let num = |v: &str| v.parse::<f64>().map_err(|e| bad(&e.to_string()));
            match key {
                "axis" => {
                    grid.axes = match value {
                        "both" => vec![SweepKind::Pause, SweepKind::Speed],
                        other => vec![other.parse().map_err(|e: String| bad(&e))?],
                    }
                }
                "nodes" => grid.nodes = parse_list(line, key, value)?,
                "pause_values" => grid.pause_values = parse_list(line, key, value)?,
                "speed_values" => grid.speed_values = parse_list(line, key, value)?,
                "pinned_speed" => grid.pinned_speed = num(value)?,
                "pinned_pause" => grid.pinned_pause = num(value)?,
                "protocols" => grid.protocols = parse_list(line, key, value)?,
                "traffic" => grid.traffic = parse_list(line, key, value)?,
                "seeds" => seeds = value.parse().map_err(|_| bad("expected a seed count"))?,
                "base_seed" => base_seed = value.parse().map_err(|_| bad("expected an integer"))?,
                "keep_traces" => {
                    grid.keep_traces = match value {
                        "true" | "yes" | "1" => true,
                        "false" | "no" | "0" => false,
                        _ => return Err(bad("expected true or false")),
                    }
                }
                _ => grid.base.set(line, key, value)?,
            }
        }
        if seeds == 0 {
            return Err(ConfigError::Invalid {
                field: "seeds",
                reason: "need at least one seed per cell".into(),
            });
        }
        grid.seeds = (0..seeds).map(|i| base_seed.wrapping_add(i)).collect();
        for cell in grid.cells() {
            cell.config(&grid.base, grid.seeds[0]).validate()?;
        }
        Ok(grid)
    }

    pub fn load(path: &Path) -> Result<Self, RunError> {
        let text = fs::read_to_string(path).map_err(|source| RunError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        SweepGrid::parse(&text).map_err(|source| RunError::Config {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Cells in a fixed order: axis, protocol, traffic, density, value.
    pub fn cells(&self) -> Vec<SweepCell> {
        let mut cells = Vec::new();
        for &axis in &self.axes {
            let values = match axis {
                SweepKind::Pause => &self.pause_values,
                SweepKind::Speed => &self.speed_values,
            };
            for &protocol in &self.protocols {
                for &traffic in &self.traffic {
                    for &nodes in &self.nodes {
                        for &v in values {
                            let (pause, speed) = match axis {
                                SweepKind::Pause => (v, self.pinned_speed),
                                SweepKind::Speed => (self.pinned_pause, v),
                            };
                            cells.push(SweepCell {
                                axis,
                                protocol,
                                traffic,
                                nodes,
                                pause,
                                speed,
                            });
                        }
                    }
                }
            }
        }
        cells
    }

    /// Every (cell, seed) pair in execution order.
    pub fn runs(&self) -> Vec<(SweepCell, u64)> {
        self.cells()
            .into_iter()
            .flat_map(|c| self.seeds.iter().map(move |&s| (c.clone(), s)))
            .collect()
    }
}

/// One CSV row: a single run, or a per-cell median (`seed == None`).
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub scenario: String,
    pub protocol: Protocol,
    pub traffic: TrafficKind,
    pub nodes: usize,
    pub pause: f64,
    pub speed: f64,
    pub seed: Option<u64>,
    pub n_sent: u64,
    pub n_received: u64,
    pub pdr: f64,
    pub lpr: f64,
    pub avg_e2e_ms: f64,
    pub axis: SweepKind,
    /// Trace file relative to the sweep directory; empty if not kept.
    pub trace: String,
}

impl ResultRow {
    pub fn is_median(&self) -> bool {
        self.seed.is_none()
    }

    pub fn report(&self) -> MetricsReport {
        MetricsReport {
            n_sent: self.n_sent,
            n_received: self.n_received,
            pdr: self.pdr,
            lpr: self.lpr,
            avg_e2e_ms: self.avg_e2e_ms,
            delay_count: self.n_received,
        }
    }

    fn value(&self) -> f64 {
        match self.axis {
            SweepKind::Pause => self.pause,
            SweepKind::Speed => self.speed,
        }
    }
}

pub const CSV_HEADER: [&str; 14] = [
    "scenario",
    "protocol",
    "traffic",
    "nodes",
    "pause",
    "speed",
    "seed",
    "n_sent",
    "n_received",
    "pdr",
    "lpr",
    "avg_e2e_ms",
    "axis",
    "trace",
];

pub fn write_results_csv<W: std::io::Write>(out: W, rows: &[ResultRow]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.scenario.clone(),
            r.protocol.to_string(),
            r.traffic.to_string(),
            r.nodes.to_string(),
            format!("{:?}", r.pause),
            format!("{:?}", r.speed),
            r.seed.map_or_else(|| "median".to_string(), |s| s.to_string()),
            r.n_sent.to_string(),
            r.n_received.to_string(),
            format!("{:?}", r.pdr),
            format!("{:?}", r.lpr),
            format!("{:?}", r.avg_e2e_ms),
            r.axis.to_string(),
            r.trace.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_results_csv<R: std::io::Read>(input: R) -> Result<Vec<ResultRow>, RunError> {
    let mut rd = csv::Reader::from_reader(input);
    let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(RunError::Results(format!("unexpected header {header:?}")));
    }
    let mut rows = Vec::new();
    for (idx, record) in rd.records().enumerate() {
        let record = record?;
        let line = idx + 2;
        let field = |i: usize| record.get(i).unwrap_or("");
        fn p<T: std::str::FromStr>(line: usize, name: &str, s: &str) -> Result<T, RunError> {
            s.parse()
                .map_err(|_| RunError::Results(format!("line {line}: bad {name} {s:?}")))
        }
        rows.push(ResultRow {
            scenario: field(0).to_string(),
            protocol: p(line, "protocol", field(1))?,
            traffic: p(line, "traffic", field(2))?,
            nodes: p(line, "nodes", field(3))?,
            pause: p(line, "pause", field(4))?,
            speed: p(line, "speed", field(5))?,
            seed: match field(6) {
                "median" => None,
                s => Some(p(line, "seed", s)?),
            },
            n_sent: p(line, "n_sent", field(7))?,
            n_received: p(line, "n_received", field(8))?,
            pdr: p(line, "pdr", field(9))?,
            lpr: p(line, "lpr", field(10))?,
            avg_e2e_ms: p(line, "avg_e2e_ms", field(11))?,
            axis: p(line, "axis", field(12))?,
            trace: field(13).to_string(),
        });
    }
    Ok(rows)
}

/// Lower median: the `(k-1)/2`-th smallest, always an observed value.
fn lower_median_index(k: usize) -> usize {
    (k - 1) / 2
}

/// Median row of a cell's runs. PDR, LPR and the counts come from the run
/// with the median PDR (so PDR and LPR stay complementary); delay is the
/// median delay.
pub fn median_row(cell: &SweepCell, runs: &[ResultRow]) -> Option<ResultRow> {
    if runs.is_empty() {
        return None;
    }
    let mid = lower_median_index(runs.len());
    let mut by_pdr: Vec<&ResultRow> = runs.iter().collect();
    by_pdr.sort_by(|a, b| a.pdr.total_cmp(&b.pdr).then(a.seed.cmp(&b.seed)));
    let mut delays: Vec<f64> = runs.iter().map(|r| r.avg_e2e_ms).collect();
    delays.sort_by(f64::total_cmp);
    let m = by_pdr[mid];
    Some(ResultRow {
        seed: None,
        avg_e2e_ms: delays[mid],
        trace: String::new(),
        scenario: cell.id(),
        ..m.clone()
    })
}

/// Decision tables for every regime the rows cover. Only median rows are
/// used. Low/high mobility are the smallest/largest node counts present,
/// low/high pause or speed the smallest/largest swept values.
pub fn tables_from_rows(rows: &[ResultRow]) -> Vec<Result<DecisionTable, AnalysisError>> {
    let medians: Vec<&ResultRow> = rows.iter().filter(|r| r.is_median()).collect();
    let mut out = Vec::new();
    for regime in Regime::ALL {
        let on_axis: Vec<&&ResultRow> = medians.iter().filter(|r| r.axis == regime.sweep).collect();
        if on_axis.is_empty() {
            continue;
        }
        let nodes = match regime.mobility {
            Mobility::Low => on_axis.iter().map(|r| r.nodes).min(),
            Mobility::High => on_axis.iter().map(|r| r.nodes).max(),
        }
        .expect("non-empty");
        let values = on_axis.iter().filter(|r| r.nodes == nodes).map(|r| r.value());
        let value = match regime.level {
            Level::Low => values.fold(f64::INFINITY, f64::min),
            Level::High => values.fold(f64::NEG_INFINITY, f64::max),
        };
        let mut cells = Vec::new();
        for r in on_axis.iter().filter(|r| r.nodes == nodes && r.value() == value) {
            let bands = classify(&r.report(), regime.sweep);
            for metric in Metric::ALL {
                cells.push(DecisionCell {
                    protocol: r.protocol,
                    traffic: r.traffic,
                    metric,
                    band: bands.get(metric),
                });
            }
        }
        out.push(build_decision_table(&cells, regime));
    }
    out
}

/// Plain-text rendering of [`tables_from_rows`]; incomplete tables are
/// reported in place.
pub fn render_tables(tables: &[Result<DecisionTable, AnalysisError>]) -> String {
    let complete: Vec<DecisionTable> = tables.iter().filter_map(|t| t.as_ref().ok().cloned()).collect();
    let mut text = render_tables_text(&complete);
    for t in tables {
        if let Err(e) = t {
            writeln!(text, "\nerror: {e}").unwrap();
        }
    }
    text
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepFailure {
    pub scenario: String,
    pub seed: u64,
    pub error: String,
}

#[derive(Debug, Clone)]
pub struct SweepSummary {
    pub total_runs: usize,
    pub rows: Vec<ResultRow>,
    pub failures: Vec<SweepFailure>,
    pub tables: Vec<Result<DecisionTable, AnalysisError>>,
}

fn run_cell(grid: &SweepGrid, cell: &SweepCell, seed: u64, out_dir: &Path) -> Result<ResultRow, RunError> {
    let config = cell.config(&grid.base, seed);
    let records = simulate(&config)?;
    let mut trace = String::new();
    if grid.keep_traces {
        let rel = format!("traces/{}-s{}.tr", cell.id(), seed);
        write_file(&out_dir.join(&rel), |w| write_trace(w, &records))?;
        trace = rel;
    }
    let report = compute_metrics(&records, cell.traffic)?;
    Ok(ResultRow {
        scenario: cell.id(),
        protocol: cell.protocol,
        traffic: cell.traffic,
        nodes: cell.nodes,
        pause: cell.pause,
        speed: cell.speed,
        seed: Some(seed),
        n_sent: report.n_sent,
        n_received: report.n_received,
        pdr: report.pdr,
        lpr: report.lpr,
        avg_e2e_ms: report.avg_e2e_ms,
        axis: cell.axis,
        trace,
    })
}

/// Runs every cell and seed (in parallel), then writes `results.csv`,
/// `tables.txt`, `tables.csv` and, if anything failed, `failures.txt` into
/// `out_dir`. Individual run failures are collected, not fatal.
pub fn run_sweep(grid: &SweepGrid, out_dir: &Path) -> Result<SweepSummary, RunError> {
    create_dir(out_dir)?;
    if grid.keep_traces {
        create_dir(&out_dir.join("traces"))?;
    }
    let cells = grid.cells();
    let jobs: Vec<(usize, u64)> = (0..cells.len())
        .flat_map(|c| grid.seeds.iter().map(move |&s| (c, s)))
        .collect();
    let results: Vec<Result<ResultRow, RunError>> = jobs
        .par_iter()
        .map(|&(c, seed)| run_cell(grid, &cells[c], seed, out_dir))
        .collect();

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let mut results = results.into_iter();
    for cell in &cells {
        let mut ok = Vec::new();
        for &seed in &grid.seeds {
            match results.next().expect("one result per job") {
                Ok(row) => ok.push(row),
                Err(e) => failures.push(SweepFailure {
                    scenario: cell.id(),
                    seed,
                    error: e.to_string(),
                }),
            }
        }
        let median = median_row(cell, &ok);
        rows.extend(ok);
        rows.extend(median);
    }

    let results_path = out_dir.join("results.csv");
    let file = File::create(&results_path).map_err(|source| RunError::Write {
        path: results_path.clone(),
        source,
    })?;
    write_results_csv(BufWriter::new(file), &rows)?;

    let tables = tables_from_rows(&rows);
    let complete: Vec<DecisionTable> = tables.iter().filter_map(|t| t.as_ref().ok().cloned()).collect();
    write_file(&out_dir.join("tables.txt"), |w| {
        std::io::Write::write_all(w, render_tables(&tables).as_bytes())
    })?;
    write_file(&out_dir.join("tables.csv"), |w| {
        std::io::Write::write_all(w, render_tables_csv(&complete).as_bytes())
    })?;
    if !failures.is_empty() {
        let mut text = String::new();
        for f in &failures {
            writeln!(text, "{} seed {}: {}", f.scenario, f.seed, f.error).unwrap();
        }
        write_file(&out_dir.join("failures.txt"), |w| {
            std::io::Write::write_all(w, text.as_bytes())
        })?;
    }
    Ok(SweepSummary {
        total_runs: jobs.len(),
        rows,
        failures,
        tables,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_grid_enumerates_120_runs_per_seed() {
        let mut grid = SweepGrid::default();
        for k in [1u64, 3, 5] {
            grid.seeds = (0..k).collect();
            assert_eq!(grid.runs().len() as u64, 120 * k);
        }
    }

    #[test]
    fn grid_keys_and_scenario_overrides() {
        let grid = SweepGrid::parse(
            "axis = speed\nnodes = 10\nspeed_values = 5, 25\nprotocols = dsr\ntraffic = cbr\nseeds = 3\nbase_seed = 7\nsim_time = 20\n",
        )
        .unwrap();
        assert_eq!(grid.axes, [SweepKind::Speed]);
        assert_eq!(grid.seeds, [7, 8, 9]);
        assert_eq!(grid.base.sim_time, 20.0);
        let cells = grid.cells();
        assert_eq!(cells.len(), 2);
        assert_eq!(cells[1].pause, 50.0);
        assert_eq!(cells[1].speed, 25.0);
    }

    #[test]
    fn grid_rejects_unknown_keys() {
        assert!(matches!(
            SweepGrid::parse("axes = both"),
            Err(ConfigError::UnknownKey { .. })
        ));
    }

    #[test]
    fn median_keeps_pdr_and_lpr_paired() {
        let cell = SweepCell {
            axis: SweepKind::Pause,
            protocol: Protocol::Aodv,
            traffic: TrafficKind::Cbr,
            nodes: 30,
            pause: 50.0,
            speed: 15.0,
        };
        let row = |seed: u64, n_received: u64, e2e: f64| {
            let r = MetricsReport::from_counts(TrafficKind::Cbr, 7, n_received, 0, 0).unwrap();
            ResultRow {
                scenario: cell.id(),
                protocol: cell.protocol,
                traffic: cell.traffic,
                nodes: 30,
                pause: 50.0,
                speed: 15.0,
                seed: Some(seed),
                n_sent: 7,
                n_received,
                pdr: r.pdr,
                lpr: r.lpr,
                avg_e2e_ms: e2e,
                axis: SweepKind::Pause,
                trace: String::new(),
            }
        };
        let runs = [row(1, 7, 5.0), row(2, 3, 9.0), row(3, 6, 1.0), row(4, 5, 2.0)];
        let m = median_row(&cell, &runs).unwrap();
        assert_eq!(m.n_received, 5);
        assert_eq!(m.pdr + m.lpr, 100.0);
        assert_eq!(m.avg_e2e_ms, 2.0);
        assert!(m.is_median());
    }

    #[test]
    fn csv_round_trip() {
        let rows = vec![ResultRow {
            scenario: "pause-aodv-cbr-n30-p50-v15".into(),
            protocol: Protocol::Aodv,
            traffic: TrafficKind::Cbr,
            nodes: 30,
            pause: 50.0,
            speed: 15.0,
            seed: None,
            n_sent: 3,
            n_received: 1,
            pdr: 100.0 / 3.0,
            lpr: 100.0 - 100.0 / 3.0,
            avg_e2e_ms: 0.1 + 0.2,
            axis: SweepKind::Pause,
            trace: String::new(),
        }];
        let mut buf = Vec::new();
        write_results_csv(&mut buf, &rows).unwrap();
        assert_eq!(read_results_csv(buf.as_slice()).unwrap(), rows);
    }
}
