//! Random waypoint motion inside a rectangular arena.
//!
//! Each node alternates between pausing at a waypoint and travelling in a
//! straight line, at a uniformly drawn speed, to a waypoint drawn uniformly
//! over the arena. The whole schedule is generated up front from the
//! mobility and topology streams so it never depends on routing or traffic.

use std::fmt::Write as _;

use crate::packet::NodeId;
use crate::sim::{RngStream, SimTime};

#[derive(Debug, Copy, Clone, PartialEq)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub fn new(x: f64, y: f64) -> Self {
        Position { x, y }
    }

    pub fn distance_sq(self, other: Position) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn distance(self, other: Position) -> f64 {
        self.distance_sq(other).sqrt()
    }
}

#[derive(Debug, Copy, Clone, PartialEq)]
pub struct Arena {
    pub width: f64,
    pub height: f64,
}

impl Arena {
    pub fn new(width: f64, height: f64) -> Self {
        Arena { width, height }
    }

    pub fn contains(&self, p: Position) -> bool {
        (0.0..=self.width).contains(&p.x) && (0.0..=self.height).contains(&p.y)
    }

    fn clamp(&self, p: Position) -> Position {
        Position::new(p.x.clamp(0.0, self.width), p.y.clamp(0.0, self.height))
    }

    pub fn center(&self) -> Position {
        Position::new(self.width / 2.0, self.height / 2.0)
    }
}

/// Speed bounds in m/s and the dwell time at each waypoint in seconds.
#[derive(Debug, Copy, Clone, PartialEq)]
pub struct WaypointParams {
    pub v_min: f64,
    pub v_max: f64,
    pub pause: f64,
}

/// One straight-line trip followed by a pause at the destination.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionLeg {
    pub origin: Position,
    pub destination: Position,
    pub speed: f64,
    pub depart_at: SimTime,
    pub arrive_at: SimTime,
    pub pause: f64,
}

impl MotionLeg {
    pub fn length(&self) -> f64 {
        self.origin.distance(self.destination)
    }

    /// When the pause at the destination ends.
    pub fn resume_at(&self) -> SimTime {
        self.arrive_at + SimTime::from_secs_f64(self.pause)
    }

    fn position_at(&self, t: SimTime) -> Position {
        if t <= self.depart_at {
            return self.origin;
        }
        if t >= self.arrive_at {
            return self.destination;
        }
        let len = self.length();
        let travelled = (self.speed * (t - self.depart_at).as_secs_f64()).min(len);
        let f = travelled / len;
        Position::new(
            self.origin.x + (self.destination.x - self.origin.x) * f,
            self.origin.y + (self.destination.y - self.origin.y) * f,
        )
    }
}

#[derive(Debug, Clone)]
pub struct RandomWaypoint {
    pub arena: Arena,
    pub params: WaypointParams,
}

impl RandomWaypoint {
    pub fn new(arena: Arena, params: WaypointParams) -> Self {
        RandomWaypoint { arena, params }
    }

    /// Draws the next trip for a node resting at `origin` at time `now`.
    pub fn next_leg(&self, origin: Position, now: SimTime, rng: &mut RngStream) -> MotionLeg {
        let destination = Position::new(rng.uniform(0.0, self.arena.width), rng.uniform(0.0, self.arena.height));
        let speed = rng.uniform(self.params.v_min, self.params.v_max);
        let travel_us = (origin.distance(destination) / speed * 1e6).ceil() as u64;
        MotionLeg {
            origin,
            destination,
            speed,
            depart_at: now,
            arrive_at: now + SimTime::from_micros(travel_us),
            pause: self.params.pause,
        }
    }
}

/// How nodes are laid out at time zero.
#[derive(Debug, Copy, Clone, PartialEq)]
pub enum Placement {
    Uniform,
    /// Uniform over a disc of this diameter centred in the arena.
    Cluster {
        diameter: f64,
    },
}

impl Placement {
    fn draw(self, arena: Arena, rng: &mut RngStream) -> Position {
        match self {
            Placement::Uniform => Position::new(rng.uniform(0.0, arena.width), rng.uniform(0.0, arena.height)),
            Placement::Cluster { diameter } => {
                let r = diameter / 2.0;
                let c = arena.center();
                loop {
                    let dx = rng.uniform(-r, r);
                    let dy = rng.uniform(-r, r);
                    if dx * dx + dy * dy <= r * r {
                        return arena.clamp(Position::new(c.x + dx, c.y + dy));
                    }
                }
            }
        }
    }
}

/// Everything a node does over the run: where it starts and every leg after.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeTrack {
    pub initial: Position,
    /// End of the desynchronising first pause (equals the first departure).
    pub first_depart: SimTime,
    pub legs: Vec<MotionLeg>,
}

impl NodeTrack {
    pub fn stationary(at: Position) -> Self {
        NodeTrack {
            initial: at,
            first_depart: SimTime::ZERO,
            legs: Vec::new(),
        }
    }

    pub fn position_at(&self, t: SimTime) -> Position {
        // last leg that departed at or before t
        let idx = self.legs.partition_point(|l| l.depart_at <= t);
        if idx == 0 {
            self.initial
        } else {
            self.legs[idx - 1].position_at(t)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MobilityModel {
    arena: Arena,
    tracks: Vec<NodeTrack>,
}

impl MobilityModel {
    /// Builds random waypoint schedules for `nodes` nodes covering `[0, horizon]`.
    ///
    /// A `v_max` of zero yields stationary nodes.
    pub fn random_waypoint(
        nodes: usize,
        waypoint: &RandomWaypoint,
        placement: Placement,
        horizon: SimTime,
        mobility_rng: &mut RngStream,
        topology_rng: &mut RngStream,
    ) -> Self {
        let arena = waypoint.arena;
        let initial: Vec<Position> = (0..nodes).map(|_| placement.draw(arena, topology_rng)).collect();
        if waypoint.params.v_max <= 0.0 {
            return Self::stationary(arena, initial);
        }
        let tracks = initial
            .into_iter()
            .map(|start| {
                let first_pause = mobility_rng.uniform(0.0, waypoint.params.pause);
                let first_depart = SimTime::from_secs_f64(first_pause);
                let mut legs = Vec::new();
                let mut at = start;
                let mut t = first_depart;
                while t < horizon {
                    let leg = waypoint.next_leg(at, t, mobility_rng);
                    at = leg.destination;
                    t = leg.resume_at();
                    legs.push(leg);
                }
                NodeTrack {
                    initial: start,
                    first_depart,
                    legs,
                }
            })
            .collect();
        MobilityModel { arena, tracks }
    }

    pub fn stationary(arena: Arena, positions: Vec<Position>) -> Self {
        MobilityModel {
            arena,
            tracks: positions.into_iter().map(NodeTrack::stationary).collect(),
        }
    }

    pub fn arena(&self) -> Arena {
        self.arena
    }

    pub fn node_count(&self) -> usize {
        self.tracks.len()
    }

    pub fn track(&self, node: NodeId) -> &NodeTrack {
        &self.tracks[node as usize]
    }

    pub fn position_at(&self, node: NodeId, t: SimTime) -> Position {
        self.arena.clamp(self.tracks[node as usize].position_at(t))
    }

    pub fn positions_at(&self, t: SimTime) -> Vec<Position> {
        (0..self.tracks.len() as NodeId)
            .map(|n| self.position_at(n, t))
            .collect()
    }

    /// Nodes within `range` of `node` at `t`, ascending. The boundary is inclusive.
    pub fn neighbors(&self, node: NodeId, t: SimTime, range: f64) -> Vec<NodeId> {
        let here = self.position_at(node, t);
        let r2 = range * range;
        (0..self.tracks.len() as NodeId)
            .filter(|&other| other != node)
            .filter(|&other| self.position_at(other, t).distance_sq(here) <= r2)
            .collect()
    }

    pub fn in_range(&self, a: NodeId, b: NodeId, t: SimTime, range: f64) -> bool {
        self.position_at(a, t).distance_sq(self.position_at(b, t)) <= range * range
    }

    /// Text export: one line per node placement (speed 0) followed by one
    /// line per leg, `node depart_s dest_x dest_y speed pause`.
    pub fn export_schedule(&self) -> String {
        let mut out = String::from("# node depart_s dest_x dest_y speed_mps pause_s\n");
        for (node, track) in self.tracks.iter().enumerate() {
            let first_pause = track.first_depart.as_secs_f64();
            writeln!(
                out,
                "{node} {} {} {} 0 {first_pause}",
                SimTime::ZERO,
                track.initial.x,
                track.initial.y
            )
            .unwrap();
            for leg in &track.legs {
                writeln!(
                    out,
                    "{node} {} {} {} {} {}",
                    leg.depart_at, leg.destination.x, leg.destination.y, leg.speed, leg.pause
                )
                .unwrap();
            }
        }
        out
    }
}
