//! Scenario configuration: a line-oriented `key = value` file.
//!
//! Every key is optional; a missing key keeps its default. Blank lines and
//! lines starting with `#` are ignored. Unknown or repeated keys are errors.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::error::{ConfigError, RunError};
use crate::medium::LinkParams;
use crate::mobility::{Arena, Placement, RandomWaypoint, WaypointParams};
use crate::packet::ROUTING_PORT;
use crate::routing::{Protocol, RoutingParams};
use crate::sim::SimTime;
use crate::traffic::{ReliableConfig, TrafficKind, TrafficParams};

#[derive(Debug, Copy, Clone, PartialEq, Eq)]
pub enum PlacementKind {
    Uniform,
    Cluster,
}

impl PlacementKind {
    fn as_str(self) -> &'static str {
        match self {
            PlacementKind::Uniform => "uniform",
            PlacementKind::Cluster => "cluster",
        }
    }
}

impl FromStr for PlacementKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "uniform" => Ok(PlacementKind::Uniform),
            "cluster" => Ok(PlacementKind::Cluster),
            _ => Err("expected uniform or cluster".into()),
        }
    }
}

/// One simulation run. Times are in seconds, distances in meters.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub protocol: Protocol,
    pub traffic: TrafficKind,
    pub nodes: usize,
    pub area_width: f64,
    pub area_height: f64,
    pub sim_time: f64,
    pub v_max: f64,
    pub v_min: f64,
    pub pause: f64,
    pub connections: usize,
    pub seed: u64,
    pub placement: PlacementKind,
    pub cluster_diameter: f64,

    pub range: f64,
    pub bitrate: u64,
    pub ifq_capacity: usize,
    pub jitter_max: f64,
    pub loss_prob: f64,

    pub cbr_size: u32,
    pub cbr_interval: f64,
    pub tcp_segment: u32,
    pub tcp_interval: f64,
    pub ack_size: u32,
    pub start_window: f64,
    pub stop_margin: f64,
    pub tcp_initial_rto: f64,
    pub tcp_ssthresh: f64,
    pub tcp_max_retries: u32,

    pub active_route_timeout: f64,
    pub rreq_retries: u32,
    pub discovery_backoff: f64,
    pub send_buffer: usize,
    pub rreq_ttl: u32,
    pub dsr_cache_replies: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let link = LinkParams::default();
        let traffic = TrafficParams::default();
        let routing = RoutingParams::default();
        ScenarioConfig {
            protocol: Protocol::Aodv,
            traffic: TrafficKind::Cbr,
            nodes: 30,
            area_width: 840.0,
            area_height: 840.0,
            sim_time: 200.0,
            v_max: 15.0,
            v_min: 0.1,
            pause: 50.0,
            connections: 8,
            seed: 0,
            placement: PlacementKind::Uniform,
            cluster_diameter: 200.0,
            range: link.range,
            bitrate: link.bitrate,
            ifq_capacity: link.ifq_capacity,
            jitter_max: link.broadcast_jitter_max,
            loss_prob: link.loss_prob,
            cbr_size: traffic.cbr_size,
            cbr_interval: traffic.cbr_interval.as_secs_f64(),
            tcp_segment: traffic.tcp_segment,
            tcp_interval: traffic.tcp_interval.as_secs_f64(),
            ack_size: traffic.ack_size,
            start_window: traffic.start_window.as_secs_f64(),
            stop_margin: traffic.stop_margin.as_secs_f64(),
            tcp_initial_rto: traffic.reliable.initial_rto.as_secs_f64(),
            tcp_ssthresh: traffic.reliable.initial_ssthresh,
            tcp_max_retries: traffic.reliable.max_retries,
            active_route_timeout: routing.active_route_timeout.as_secs_f64(),
            rreq_retries: routing.rreq_retries,
            discovery_backoff: routing.discovery_backoff.as_secs_f64(),
            send_buffer: routing.send_buffer,
            rreq_ttl: routing.rreq_ttl,
            dsr_cache_replies: routing.cache_replies,
        }
    }
}

fn parse_value<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: ToString,
{
    value.parse::<T>().map_err(|e| ConfigError::BadValue {
        line,
        key: key.to_string(),
        value: value.to_string(),
        reason: e.to_string(),
    })
}

fn parse_bool(s: &str) -> Result<bool, String> {
    match s {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err("expected true or false".into()),
    }
}

/// Calls `$m!(key, field, kind)` for every config key.
macro_rules! for_each_key {
    ($m:ident) => {
        $m!(protocol, protocol, parse);
        $m!(traffic, traffic, parse);
        $m!(nodes, nodes, parse);
        $m!(area_width, area_width, parse);
        $m!(area_height, area_height, parse);
        $m!(sim_time, sim_time, parse);
        $m!(v_max, v_max, parse);
        $m!(v_min, v_min, parse);
        $m!(pause, pause, parse);
        $m!(connections, connections, parse);
        $m!(seed, seed, parse);
        $m!(placement, placement, parse);
        $m!(cluster_diameter, cluster_diameter, parse);
        $m!(range, range, parse);
        $m!(bitrate, bitrate, parse);
        $m!(ifq_capacity, ifq_capacity, parse);
        $m!(jitter_max, jitter_max, parse);
        $m!(loss_prob, loss_prob, parse);
        $m!(cbr_size, cbr_size, parse);
        $m!(cbr_interval, cbr_interval, parse);
        $m!(tcp_segment, tcp_segment, parse);
        $m!(tcp_interval, tcp_interval, parse);
        $m!(ack_size, ack_size, parse);
        $m!(start_window, start_window, parse);
        $m!(stop_margin, stop_margin, parse);
        $m!(tcp_initial_rto, tcp_initial_rto, parse);
        $m!(tcp_ssthresh, tcp_ssthresh, parse);
        $m!(tcp_max_retries, tcp_max_retries, parse);
        $m!(active_route_timeout, active_route_timeout, parse);
        $m!(rreq_retries, rreq_retries, parse);
        $m!(discovery_backoff, discovery_backoff, parse);
        $m!(send_buffer, send_buffer, parse);
        $m!(rreq_ttl, rreq_ttl, parse);
        $m!(dsr_cache_replies, dsr_cache_replies, bool);
    };
}

impl ScenarioConfig {
    /// Applies one `key = value` setting. `line` is only used in errors.
    pub fn set(&mut self, line: usize, key: &str, value: &str) -> Result<(), ConfigError> {
        macro_rules! arm {
            ($k:ident, $f:ident, parse) => {
                if key == stringify!($k) {
                    self.$f = parse_value(line, key, value)?;
                    return Ok(());
                }
            };
            ($k:ident, $f:ident, bool) => {
                if key == stringify!($k) {
                    self.$f = parse_bool(value).map_err(|reason| ConfigError::BadValue {
                        line,
                        key: key.to_string(),
                        value: value.to_string(),
                        reason,
                    })?;
                    return Ok(());
                }
            };
        }
        for_each_key!(arm);
        Err(ConfigError::UnknownKey {
            line,
            key: key.to_string(),
        })
    }

    /// Parses config text on top of the defaults and validates the result.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = ScenarioConfig::default();
        let mut seen = BTreeSet::new();
        for (key, value, line) in key_values(text)? {
            if !seen.insert(key.to_string()) {
                return Err(ConfigError::BadValue {
                    line,
                    key: key.to_string(),
                    value: value.to_string(),
                    reason: "key given twice".into(),
                });
            }
            cfg.set(line, key, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Serializes every key; `parse` of the output yields an identical config.
    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        macro_rules! emit {
            ($k:ident, $f:ident, $kind:ident) => {
                writeln!(out, "{} = {}", stringify!($k), Show(&self.$f)).unwrap();
            };
        }
        for_each_key!(emit);
        out
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        fn fail(field: &'static str, reason: impl Into<String>) -> Result<(), ConfigError> {
            Err(ConfigError::Invalid {
                field,
                reason: reason.into(),
            })
        }
        let finite_pos = |v: f64| v.is_finite() && v > 0.0;
        let finite_nonneg = |v: f64| v.is_finite() && v >= 0.0;
        if self.nodes < 2 {
            return fail("nodes", format!("need at least 2 nodes, got {}", self.nodes));
        }
        if self.nodes > u32::MAX as usize {
            return fail("nodes", "too many nodes");
        }
        if self.connections < 1 {
            return fail("connections", "need at least one connection");
        }
        if self.connections > self.nodes * (self.nodes - 1) {
            return fail("connections", "more connections than distinct node pairs");
        }
        if self.connections > ROUTING_PORT as usize {
            return fail(
                "connections",
                format!("at most {ROUTING_PORT}; port {ROUTING_PORT} is reserved for routing"),
            );
        }
        if !finite_pos(self.area_width) || !finite_pos(self.area_height) {
            return fail("area_width", "area dimensions must be positive");
        }
        if !finite_pos(self.sim_time) {
            return fail("sim_time", "must be positive");
        }
        if !finite_nonneg(self.stop_margin) || self.stop_margin >= self.sim_time {
            return fail("stop_margin", "must be non-negative and shorter than sim_time");
        }
        if !finite_nonneg(self.start_window) {
            return fail("start_window", "must be non-negative");
        }
        if !finite_nonneg(self.v_max) {
            return fail("v_max", "must be non-negative");
        }
        if !finite_pos(self.v_min) {
            return fail("v_min", "must be positive");
        }
        if self.v_max > 0.0 && self.v_max < self.v_min {
            return fail(
                "v_max",
                format!("must be 0 (static) or at least v_min = {}", self.v_min),
            );
        }
        if !finite_nonneg(self.pause) {
            return fail("pause", "must be non-negative");
        }
        if self.placement == PlacementKind::Cluster && !finite_pos(self.cluster_diameter) {
            return fail("cluster_diameter", "must be positive");
        }
        if !finite_pos(self.range) {
            return fail("range", "must be positive");
        }
        if self.bitrate == 0 {
            return fail("bitrate", "must be positive");
        }
        if self.ifq_capacity == 0 {
            return fail("ifq_capacity", "must be at least 1");
        }
        if !finite_nonneg(self.jitter_max) {
            return fail("jitter_max", "must be non-negative");
        }
        if !(0.0..1.0).contains(&self.loss_prob) {
            return fail("loss_prob", "must be in [0, 1)");
        }
        if self.cbr_size == 0 || self.tcp_segment == 0 || self.ack_size == 0 {
            return fail("cbr_size", "packet sizes must be positive");
        }
        if SimTime::from_secs_f64(self.cbr_interval) == SimTime::ZERO || !self.cbr_interval.is_finite() {
            return fail("cbr_interval", "must be at least one microsecond");
        }
        if !finite_nonneg(self.tcp_interval) {
            return fail("tcp_interval", "must be non-negative (0 = bulk transfer)");
        }
        if !finite_pos(self.tcp_initial_rto) {
            return fail("tcp_initial_rto", "must be positive");
        }
        if !(self.tcp_ssthresh.is_finite() && self.tcp_ssthresh >= 1.0) {
            return fail("tcp_ssthresh", "must be at least 1");
        }
        if !finite_pos(self.active_route_timeout) {
            return fail("active_route_timeout", "must be positive");
        }
        if !finite_pos(self.discovery_backoff) {
            return fail("discovery_backoff", "must be positive");
        }
        if self.rreq_ttl == 0 {
            return fail("rreq_ttl", "must be at least 1");
        }
        Ok(())
    }

    pub fn end_time(&self) -> SimTime {
        SimTime::from_secs_f64(self.sim_time)
    }

    pub fn arena(&self) -> Arena {
        Arena::new(self.area_width, self.area_height)
    }

    pub fn waypoint(&self) -> RandomWaypoint {
        RandomWaypoint::new(
            self.arena(),
            WaypointParams {
                v_min: self.v_min,
                v_max: self.v_max,
                pause: self.pause,
            },
        )
    }

    pub fn placement(&self) -> Placement {
        match self.placement {
            PlacementKind::Uniform => Placement::Uniform,
            PlacementKind::Cluster => Placement::Cluster {
                diameter: self.cluster_diameter,
            },
        }
    }

    pub fn link_params(&self) -> LinkParams {
        LinkParams {
            range: self.range,
            bitrate: self.bitrate,
            ifq_capacity: self.ifq_capacity,
            broadcast_jitter_max: self.jitter_max,
            loss_prob: self.loss_prob,
        }
    }

    pub fn traffic_params(&self) -> TrafficParams {
        TrafficParams {
            cbr_size: self.cbr_size,
            cbr_interval: SimTime::from_secs_f64(self.cbr_interval),
            tcp_segment: self.tcp_segment,
            tcp_interval: SimTime::from_secs_f64(self.tcp_interval),
            ack_size: self.ack_size,
            start_window: SimTime::from_secs_f64(self.start_window),
            stop_margin: SimTime::from_secs_f64(self.stop_margin),
            reliable: ReliableConfig {
                initial_rto: SimTime::from_secs_f64(self.tcp_initial_rto),
                initial_ssthresh: self.tcp_ssthresh,
                max_retries: self.tcp_max_retries,
                ..ReliableConfig::default()
            },
        }
    }

    pub fn routing_params(&self) -> RoutingParams {
        RoutingParams {
            active_route_timeout: SimTime::from_secs_f64(self.active_route_timeout),
            rreq_retries: self.rreq_retries,
            discovery_backoff: SimTime::from_secs_f64(self.discovery_backoff),
            send_buffer: self.send_buffer,
            rreq_ttl: self.rreq_ttl,
            cache_replies: self.dsr_cache_replies,
        }
    }

    /// Short name used for output files, e.g. `aodv-cbr-n30-p50-v15-s0`.
    pub fn scenario_id(&self) -> String {
        format!(
            "{}-{}-n{}-p{}-v{}-s{}",
            self.protocol, self.traffic, self.nodes, self.pause, self.v_max, self.seed
        )
    }
}

/// Display wrapper so every field type prints in a form `parse` accepts.
struct Show<'a, T>(&'a T);

macro_rules! show_display {
    ($($t:ty),*) => {$(
        impl std::fmt::Display for Show<'_, $t> {
            fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                write!(f, "{}", self.0)
            }
        }
    )*};
}

show_display!(Protocol, TrafficKind, usize, u64, u32, f64, bool);

impl std::fmt::Display for Show<'_, PlacementKind> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.0.as_str())
    }
}

/// Splits config text into `(key, value, line)` triples.
pub(crate) fn key_values(text: &str) -> Result<Vec<(&str, &str, usize)>, ConfigError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        // no value contains '#', so anything after one is a comment
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line: idx + 1,
            text: raw.to_string(),
        })?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return Err(ConfigError::Syntax {
                line: idx + 1,
                text: raw.to_string(),
            });
        }
        out.push((key, value, idx + 1));
    }
    Ok(out)
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig, RunError> {
    let text = std::fs::read_to_string(path).map_err(|source| RunError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    ScenarioConfig::parse(&text).map_err(|source| RunError::Config {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_config(path: &Path, config: &ScenarioConfig) -> Result<(), RunError> {
    std::fs::write(path, config.to_config_string()).map_err(|source| RunError::Write {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        let cfg = ScenarioConfig::parse("").unwrap();
        assert_eq!(cfg, ScenarioConfig::default());
        assert_eq!(cfg.protocol, Protocol::Aodv);
        assert_eq!(cfg.traffic, TrafficKind::Cbr);
        assert_eq!(cfg.nodes, 30);
        assert_eq!(cfg.seed, 0);
        assert_eq!((cfg.area_width, cfg.area_height, cfg.sim_time), (840.0, 840.0, 200.0));
        assert_eq!(cfg.connections, 8);
    }

    #[test]
    fn one_node_is_rejected() {
        let err = ScenarioConfig::parse("nodes = 1").unwrap_err();
        assert!(matches!(err, ConfigError::Invalid { field: "nodes", .. }), "{err}");
    }

    #[test]
    fn unknown_key_names_line() {
        let err = ScenarioConfig::parse("# c\n\nnodez = 4").unwrap_err();
        assert_eq!(
            err,
            ConfigError::UnknownKey {
                line: 3,
                key: "nodez".into()
            }
        );
    }

    #[test]
    fn bad_value_names_key() {
        let err = ScenarioConfig::parse("protocol = olsr").unwrap_err();
        assert!(matches!(err, ConfigError::BadValue { ref key, .. } if key == "protocol"));
        let err = ScenarioConfig::parse("dsr_cache_replies = maybe").unwrap_err();
        assert!(matches!(err, ConfigError::BadValue { ref key, .. } if key == "dsr_cache_replies"));
    }

    #[test]
    fn trailing_comments_are_ignored() {
        let cfg = ScenarioConfig::parse("nodes = 90   # dense\n  # indented\n").unwrap();
        assert_eq!(cfg.nodes, 90);
    }

    #[test]
    fn repeated_key_is_rejected() {
        assert!(ScenarioConfig::parse("seed = 1\nseed = 2").is_err());
    }

    #[test]
    fn round_trip() {
        let cfg = ScenarioConfig::parse(
            "protocol = DSR\ntraffic = tcp\nnodes = 90\npause = 0.3\nv_max = 0\nplacement = cluster\njitter_max = 0.0125\n",
        )
        .unwrap();
        assert_eq!(ScenarioConfig::parse(&cfg.to_config_string()).unwrap(), cfg);
    }
}
