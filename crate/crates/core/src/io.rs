//! Trajectory serialization: a flat, diff-friendly JSON schema used by the
//! CLI and golden-file tests.
//!
//! ```json
//! {
//!   "table": "cyl:0,0,1",
//!   "arcs": [{"start": {"x":…,"y":…,"z":…,"a":…,"b":…,"c":…}, "duration": …}],
//!   "events": [{"time": …, "point": {"x":…,"y":…,"z":…}, "face": "wall",
//!               "kind": "reflection", "s": …}],
//!   "termination": "max_bounces",
//!   "total_length": …
//! }
//! ```
//!
//! Numbers are emitted in shortest round-trip form, so
//! serialize → parse → serialize is byte-identical.

use crate::dynamics::{Termination, Trajectory};
use crate::geometry::{Covector, GeodesicArc, Point3, State};
use crate::reflection::ReflectionOutcome;
use crate::tables::TableSpec;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct StateRecord {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PointRecord {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ArcRecord {
    pub start: StateRecord,
    pub duration: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct EventRecord {
    /// Arc parameter of the contact on its arc.
    pub time: f64,
    pub point: PointRecord,
    pub face: String,
    /// reflection | inner_tangency | outer_tangency | singular | corner
    pub kind: String,
    /// Jump parameter along dG; `null` when no jump happened.
    pub s: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TrajectoryFile {
    pub table: String,
    pub arcs: Vec<ArcRecord>,
    pub events: Vec<EventRecord>,
    pub termination: String,
    pub total_length: f64,
}

impl From<&Trajectory> for TrajectoryFile {
    fn from(traj: &Trajectory) -> Self {
        let arcs = traj
            .arcs
            .iter()
            .map(|arc| ArcRecord {
                start: StateRecord {
                    x: arc.start.point.x,
                    y: arc.start.point.y,
                    z: arc.start.point.z,
                    a: arc.start.momentum.a,
                    b: arc.start.momentum.b,
                    c: arc.start.momentum.c,
                },
                duration: arc.duration,
            })
            .collect();
        let events = traj
            .events
            .iter()
            .map(|ev| {
                let (kind, s) = match ev.outcome {
                    Some(ReflectionOutcome::NonDegenerate { s, .. }) => ("reflection", Some(s)),
                    Some(ReflectionOutcome::InnerTangency) => ("inner_tangency", None),
                    Some(ReflectionOutcome::OuterTangency) => ("outer_tangency", None),
                    Some(ReflectionOutcome::SingularPoint) => ("singular", None),
                    None => ("corner", None),
                };
                EventRecord {
                    time: ev.time,
                    point: PointRecord {
                        x: ev.contact.point.x,
                        y: ev.contact.point.y,
                        z: ev.contact.point.z,
                    },
                    face: ev.contact.face.name().to_string(),
                    kind: kind.to_string(),
                    s,
                }
            })
            .collect();
        TrajectoryFile {
            table: traj.table.to_grammar(),
            arcs,
            events,
            termination: traj.termination.name().to_string(),
            total_length: traj.total_length(),
        }
    }
}

impl TrajectoryFile {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trajectory records always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn parse_table(&self) -> Result<TableSpec, crate::tables::TableError> {
        TableSpec::parse(&self.table)
    }

    /// Geodesic arcs of the file, for replotting.
    pub fn geodesic_arcs(&self) -> Vec<GeodesicArc> {
        self.arcs
            .iter()
            .map(|a| GeodesicArc {
                start: State {
                    point: Point3::new(a.start.x, a.start.y, a.start.z),
                    momentum: Covector::new(a.start.a, a.start.b, a.start.c),
                },
                duration: a.duration,
            })
            .collect()
    }

    pub fn termination_parsed(&self) -> Option<Termination> {
        Some(match self.termination.as_str() {
            "max_bounces" => Termination::MaxBounces,
            "max_length" => Termination::MaxLength,
            "corner_hit" => Termination::CornerHit,
            "singular_hit" => Termination::SingularHit,
            "outer_tangency_stop" => Termination::OuterTangencyStop,
            "escaped" => Termination::Escaped,
            _ => return None,
        })
    }
}
