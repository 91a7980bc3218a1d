#![allow(dead_code)]

use adhocsim::analysis::MetricsReport;
use adhocsim::config::{PlacementKind, ScenarioConfig};
use adhocsim::network::Simulation;
use adhocsim::packet::{FlowId, PacketKind};
use adhocsim::routing::Router;
use adhocsim::runner::build_simulation;
use adhocsim::sim::{RngStream, SimTime, StreamLabel};
use adhocsim::trace::{Layer, TraceEvent, TraceRecord};
use adhocsim::traffic::TrafficKind;

pub const EVENTS: [TraceEvent; 4] = [
    TraceEvent::Send,
    TraceEvent::Recv,
    TraceEvent::Drop,
    TraceEvent::Forward,
];
pub const LAYERS: [Layer; 3] = [Layer::Agt, Layer::Rtr, Layer::Mac];

fn pick<T: Copy>(rng: &mut RngStream, items: &[T]) -> T {
    items[rng.below(items.len() as u64) as usize]
}

/// A synthetic trace with non-decreasing times, a handful of flows and
/// heavily reused seqnos so that collisions are common. Agent sends are
/// over-represented to keep most traces analyzable.
pub fn random_trace(rng: &mut RngStream, max_len: usize) -> Vec<TraceRecord> {
    let flows = [
        FlowId::new(0, 5, 0, 0),
        FlowId::new(2, 7, 1, 1),
        FlowId::new(5, 0, 2, 2),
    ];
    let len = rng.below(max_len as u64 + 1) as usize;
    let mut t = 0u64;
    (0..len)
        .map(|_| {
            t += rng.below(300_000);
            let agent_send = rng.chance(0.3);
            TraceRecord {
                event: if agent_send {
                    TraceEvent::Send
                } else {
                    pick(rng, &EVENTS)
                },
                time: SimTime::from_micros(t),
                node: rng.below(8) as u32,
                layer: if agent_send { Layer::Agt } else { pick(rng, &LAYERS) },
                seqno: rng.below(12),
                pkt_type: pick(rng, &PacketKind::ALL),
                size: rng.below(2000) as u32,
                flow: pick(rng, &flows),
            }
        })
        .collect()
}

/// Quadratic recount straight from the definitions: agent-level counts of
/// the data type, and for each (flow, seqno) the gap between its first
/// agent send and the first agent receive recorded after it.
#[derive(Debug, Clone, PartialEq)]
pub struct Recount {
    pub n_sent: u64,
    pub n_received: u64,
    pub delays_ns: Vec<u64>,
}

pub fn brute_force(records: &[TraceRecord], data_type: TrafficKind) -> Recount {
    let kind = data_type.data_kind();
    let agent = |r: &TraceRecord, e: TraceEvent| r.layer == Layer::Agt && r.event == e && r.pkt_type == kind;
    let n_sent = records.iter().filter(|r| agent(r, TraceEvent::Send)).count() as u64;
    let n_received = records.iter().filter(|r| agent(r, TraceEvent::Recv)).count() as u64;
    let mut delays_ns = Vec::new();
    for (i, s) in records.iter().enumerate() {
        if !agent(s, TraceEvent::Send) {
            continue;
        }
        let first = records[..i]
            .iter()
            .all(|p| !(agent(p, TraceEvent::Send) && p.flow == s.flow && p.seqno == s.seqno));
        if !first {
            continue;
        }
        if let Some(r) = records[i + 1..]
            .iter()
            .find(|r| agent(r, TraceEvent::Recv) && r.flow == s.flow && r.seqno == s.seqno)
        {
            delays_ns.push((r.time.as_micros() - s.time.as_micros()) * 1_000);
        }
    }
    Recount {
        n_sent,
        n_received,
        delays_ns,
    }
}

/// Compares a report with a recount: counts exactly, average delay to 1 ns.
pub fn matches_recount(report: &MetricsReport, oracle: &Recount) -> Result<(), String> {
    if (report.n_sent, report.n_received) != (oracle.n_sent, oracle.n_received) {
        return Err(format!(
            "counts {}/{} vs recount {}/{}",
            report.n_received, report.n_sent, oracle.n_received, oracle.n_sent
        ));
    }
    if report.delay_count != oracle.delays_ns.len() as u64 {
        return Err(format!(
            "delay samples {} vs recount {}",
            report.delay_count,
            oracle.delays_ns.len()
        ));
    }
    let avg_ns = if oracle.delays_ns.is_empty() {
        0.0
    } else {
        oracle.delays_ns.iter().sum::<u64>() as f64 / oracle.delays_ns.len() as f64
    };
    let got_ns = report.avg_e2e_ms * 1e6;
    if (got_ns - avg_ns).abs() >= 1.0 {
        return Err(format!("average delay {got_ns} ns vs recount {avg_ns} ns"));
    }
    Ok(())
}

/// Thirty motionless nodes inside one 200 m disc: everyone hears everyone.
pub fn static_cluster(traffic: TrafficKind, seed: u64) -> ScenarioConfig {
    ScenarioConfig {
        traffic,
        nodes: 30,
        v_max: 0.0,
        placement: PlacementKind::Cluster,
        cluster_diameter: 200.0,
        seed,
        ..ScenarioConfig::default()
    }
}

/// Ten motionless nodes scattered over a square small enough that most
/// instances are connected but still multi-hop.
pub fn static_ten(seed: u64) -> ScenarioConfig {
    ScenarioConfig {
        nodes: 10,
        area_width: 600.0,
        area_height: 600.0,
        v_max: 0.0,
        sim_time: 30.0,
        connections: 6,
        seed,
        ..ScenarioConfig::default()
    }
}

pub fn rng(seed: u64) -> RngStream {
    RngStream::new(seed, StreamLabel::Traffic)
}

/// Hop distances from `from` in the unit-disk graph at time zero.
pub fn bfs(sim: &Simulation, range: f64, from: u32) -> Vec<Option<u32>> {
    let n = sim.mobility().node_count();
    let mut dist = vec![None; n];
    dist[from as usize] = Some(0);
    let mut queue = std::collections::VecDeque::from([from]);
    while let Some(u) = queue.pop_front() {
        for v in 0..n as u32 {
            if dist[v as usize].is_none() && v != u && sim.mobility().in_range(u, v, SimTime::ZERO, range) {
                dist[v as usize] = Some(dist[u as usize].unwrap() + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Routing sanity on a motionless network, checked once per second of
/// simulated time. AODV: every table entry's hop count is at least the true
/// shortest distance, and following usable next hops reaches the destination
/// without revisiting a node within `n - 1` steps. DSR: every source route
/// put on the air, and every cached path, is duplicate-free and each hop is
/// within radio range.
pub fn check_static_routes(config: &ScenarioConfig) -> Result<usize, String> {
    let mut sim = build_simulation(config).map_err(|e| e.to_string())?;
    sim.record_hops();
    let n = config.nodes as u32;
    let range = config.range;
    let dist: Vec<Vec<Option<u32>>> = (0..n).map(|u| bfs(&sim, range, u)).collect();
    let in_range = |a: u32, b: u32| sim_in_range(&dist, a, b);
    let mut checked = 0usize;
    let steps = (config.sim_time.ceil() as u64).max(1);
    for step in 1..=steps {
        sim.run_until(SimTime::from_secs_f64(step as f64).min(sim.end()));
        let now = sim.now();
        for u in 0..n {
            match sim.router(u) {
                Router::Aodv(agent) => {
                    for (&dest, e) in agent.table() {
                        checked += 1;
                        let shortest = dist[u as usize][dest as usize]
                            .ok_or_else(|| format!("node {u} has a route to unreachable {dest}"))?;
                        if e.hop_count < shortest {
                            return Err(format!(
                                "node {u} -> {dest}: hop_count {} below shortest {shortest}",
                                e.hop_count
                            ));
                        }
                        if !in_range(u, e.next_hop) {
                            return Err(format!("node {u} -> {dest}: next hop {} out of range", e.next_hop));
                        }
                        if !e.is_usable(now) {
                            continue;
                        }
                        let mut at = u;
                        let mut seen = vec![u];
                        while at != dest {
                            let Some(r) = sim.router(at).as_aodv().unwrap().usable_route(dest, now) else {
                                break;
                            };
                            at = r.next_hop;
                            if seen.contains(&at) {
                                return Err(format!("routing loop toward {dest}: {seen:?} -> {at}"));
                            }
                            seen.push(at);
                            if seen.len() > n as usize {
                                return Err(format!("walk toward {dest} exceeds {} steps", n - 1));
                            }
                        }
                    }
                }
                Router::Dsr(agent) => {
                    for p in agent.cache().paths() {
                        checked += 1;
                        check_path(&p.path, &in_range).map_err(|e| format!("node {u} cache: {e}"))?;
                    }
                }
            }
        }
    }
    for h in sim.hops() {
        if let Some(route) = &h.source_route {
            checked += 1;
            check_path(route, &in_range).map_err(|e| format!("{} at {}: {e}", h.kind, h.time))?;
        }
        if let Some(next) = h.next_hop {
            if !in_range(h.node, next) {
                return Err(format!("unicast {} -> {next} out of range", h.node));
            }
        }
    }
    Ok(checked)
}

fn sim_in_range(dist: &[Vec<Option<u32>>], a: u32, b: u32) -> bool {
    dist[a as usize][b as usize] == Some(1)
}

fn check_path(path: &[u32], in_range: &impl Fn(u32, u32) -> bool) -> Result<(), String> {
    let mut seen = std::collections::BTreeSet::new();
    if let Some(dup) = path.iter().find(|n| !seen.insert(**n)) {
        return Err(format!("route {path:?} repeats node {dup}"));
    }
    if let Some(w) = path.windows(2).find(|w| !in_range(w[0], w[1])) {
        return Err(format!("route {path:?} hop {} -> {} out of range", w[0], w[1]));
    }
    Ok(())
}
