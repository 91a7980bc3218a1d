mod common;

use std::collections::BTreeMap;
use std::fs;

use adhocsim::analysis::compute_metrics;
use adhocsim::config::{load_config, write_config, ScenarioConfig};
use adhocsim::packet::{FlowId, PacketKind};
use adhocsim::routing::Protocol;
use adhocsim::runner::{
    build_mobility, read_results_csv, render_tables, run_scenario, run_sweep, simulate, tables_from_rows, SweepGrid,
};
use adhocsim::trace::{read_trace, Layer, TraceEvent};
use adhocsim::traffic::TrafficKind;
use common::{check_static_routes, static_cluster, static_ten};

#[test]
fn static_cluster_delivers_everything() {
    for protocol in Protocol::ALL {
        let cfg = ScenarioConfig {
            protocol,
            ..static_cluster(TrafficKind::Cbr, 3)
        };
        let report = compute_metrics(&simulate(&cfg).unwrap(), TrafficKind::Cbr).unwrap();
        assert_eq!((report.pdr, report.lpr), (100.0, 0.0), "{protocol}");
        assert!(report.n_sent > 1000);
    }
}

#[test]
fn reliable_stream_arrives_in_order_without_gaps() {
    for protocol in Protocol::ALL {
        let cfg = ScenarioConfig {
            protocol,
            ..static_cluster(TrafficKind::Tcp, 4)
        };
        let trace = simulate(&cfg).unwrap();
        let mut delivered: BTreeMap<FlowId, Vec<u64>> = BTreeMap::new();
        let mut sent: BTreeMap<FlowId, u64> = BTreeMap::new();
        for r in trace
            .iter()
            .filter(|r| r.layer == Layer::Agt && r.pkt_type == PacketKind::Tcp)
        {
            match r.event {
                TraceEvent::Recv => delivered.entry(r.flow).or_default().push(r.seqno),
                TraceEvent::Send => *sent.entry(r.flow).or_default() += 1,
                _ => {}
            }
        }
        assert_eq!(sent.len(), cfg.connections);
        for (flow, seqs) in &delivered {
            let expected: Vec<u64> = (0..seqs.len() as u64).collect();
            assert_eq!(seqs, &expected, "{protocol} {flow:?}");
            assert_eq!(seqs.len() as u64, sent[flow]);
        }
    }
}

#[test]
fn same_seed_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ScenarioConfig {
        sim_time: 60.0,
        protocol: Protocol::Dsr,
        traffic: TrafficKind::Tcp,
        seed: 9,
        ..ScenarioConfig::default()
    };
    let a = run_scenario(&cfg, &dir.path().join("a")).unwrap();
    let b = run_scenario(&cfg, &dir.path().join("b")).unwrap();
    assert_eq!(fs::read(&a.trace_path).unwrap(), fs::read(&b.trace_path).unwrap());
    assert_eq!(a.report, b.report);

    // and the written trace re-analyzes to the same report
    let records = read_trace(std::io::BufReader::new(fs::File::open(&a.trace_path).unwrap())).unwrap();
    assert_eq!(compute_metrics(&records, TrafficKind::Tcp).unwrap(), a.report);
}

#[test]
fn protocols_share_motion() {
    let aodv = ScenarioConfig {
        seed: 21,
        ..ScenarioConfig::default()
    };
    let dsr = ScenarioConfig {
        protocol: Protocol::Dsr,
        traffic: TrafficKind::Tcp,
        ..aodv.clone()
    };
    assert_eq!(
        build_mobility(&aodv).export_schedule(),
        build_mobility(&dsr).export_schedule()
    );
    let other = ScenarioConfig { seed: 22, ..aodv };
    assert_ne!(
        build_mobility(&other).export_schedule(),
        build_mobility(&dsr).export_schedule()
    );
}

#[test]
fn static_routes_are_sound() {
    for seed in 0..12 {
        for protocol in Protocol::ALL {
            let cfg = ScenarioConfig {
                protocol,
                ..static_ten(seed)
            };
            let checked = check_static_routes(&cfg).unwrap_or_else(|e| panic!("{protocol} seed {seed}: {e}"));
            assert!(checked > 0);
        }
    }
}

#[test]
fn config_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.cfg");
    let cfg = ScenarioConfig {
        protocol: Protocol::Dsr,
        pause: 123.5,
        loss_prob: 0.01,
        ..ScenarioConfig::default()
    };
    write_config(&path, &cfg).unwrap();
    assert_eq!(load_config(&path).unwrap(), cfg);

    fs::write(&path, "").unwrap();
    assert_eq!(load_config(&path).unwrap(), ScenarioConfig::default());
    assert!(load_config(&dir.path().join("missing.cfg")).is_err());
}

fn small_grid(seeds: u64) -> SweepGrid {
    SweepGrid::parse(&format!(
        "axis = pause\nnodes = 20\npause_values = 100\nprotocols = aodv\ntraffic = cbr\nseeds = {seeds}\nsim_time = 40\n"
    ))
    .unwrap()
}

#[test]
fn one_cell_three_seeds() {
    let dir = tempfile::tempdir().unwrap();
    let summary = run_sweep(&small_grid(3), dir.path()).unwrap();
    assert!(summary.failures.is_empty());
    assert_eq!(summary.rows.len(), 4);
    assert_eq!(summary.rows.iter().filter(|r| r.is_median()).count(), 1);
    let csv = fs::read_to_string(dir.path().join("results.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);

    // every referenced trace exists and re-analyzes to its row
    for row in summary.rows.iter().filter(|r| !r.is_median()) {
        let file = fs::File::open(dir.path().join(&row.trace)).unwrap();
        let report = compute_metrics(&read_trace(std::io::BufReader::new(file)).unwrap(), row.traffic).unwrap();
        assert_eq!((report.n_sent, report.n_received), (row.n_sent, row.n_received));
        assert_eq!((report.pdr, report.avg_e2e_ms), (row.pdr, row.avg_e2e_ms));
    }
}

#[test]
fn sweep_is_reproducible_and_table_matches() {
    // both axes, both protocols and traffic types, two densities: every regime is covered
    let grid = SweepGrid::parse(
        "nodes = 10, 20\npause_values = 0, 40\nspeed_values = 5, 20\nseeds = 2\nsim_time = 30\nkeep_traces = false\n",
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let a = run_sweep(&grid, &dir.path().join("a")).unwrap();
    let b = run_sweep(&grid, &dir.path().join("b")).unwrap();
    for f in ["results.csv", "tables.txt", "tables.csv"] {
        assert_eq!(
            fs::read(dir.path().join("a").join(f)).unwrap(),
            fs::read(dir.path().join("b").join(f)).unwrap(),
            "{f}"
        );
    }
    assert_eq!(a.total_runs, 2 * 2 * 2 * 2 * 2 * 2);
    assert_eq!(a.tables.len(), 8);
    assert!(a.tables.iter().all(Result::is_ok));
    assert_eq!(a.rows, b.rows);

    let rows = read_results_csv(fs::File::open(dir.path().join("a/results.csv")).unwrap()).unwrap();
    assert_eq!(rows, a.rows);
    let text = render_tables(&tables_from_rows(&rows));
    assert_eq!(text, fs::read_to_string(dir.path().join("a/tables.txt")).unwrap());
    assert!(text.contains("LOW MOBILITY & HIGH PAUSE TIME"));
    assert!(text.contains("HIGH MOBILITY & LOW SPEED"));
}
