//! Map-matched trajectories: ordered, timestamped sequences of road segments.

use std::collections::HashSet;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::network::{create, read_rows, RoadNetwork};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Visit {
    /// Seconds.
    pub t: f64,
    /// Edge index into the network.
    pub edge: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub id: String,
    pub visits: Vec<Visit>,
}

impl Trajectory {
    pub fn new(id: impl Into<String>, visits: Vec<Visit>) -> Self {
        Trajectory {
            id: id.into(),
            visits,
        }
    }

    /// Build from a plain edge sequence stamped at constant speed from t=0.
    pub fn from_edges(id: impl Into<String>, edges: &[usize], net: &RoadNetwork, speed: f64) -> Self {
        let mut t = 0.0;
        let visits = edges
            .iter()
            .map(|&edge| {
                let v = Visit { t, edge };
                t += net.edge(edge).length / speed;
                v
            })
            .collect();
        Trajectory::new(id, visits)
    }

    pub fn len(&self) -> usize {
        self.visits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.visits.is_empty()
    }

    pub fn edges(&self) -> impl Iterator<Item = usize> + '_ {
        self.visits.iter().map(|v| v.edge)
    }

    /// Distinct edge indices, ascending.
    pub fn distinct_edges(&self) -> Vec<usize> {
        let mut e: Vec<usize> = self.edges().collect();
        e.sort_unstable();
        e.dedup();
        e
    }

    /// Tail node of the first edge.
    pub fn start_node(&self, net: &RoadNetwork) -> usize {
        net.edge(self.visits[0].edge).from
    }

    /// Head node of the last edge.
    pub fn end_node(&self, net: &RoadNetwork) -> usize {
        net.edge(self.visits[self.visits.len() - 1].edge).to
    }

    pub fn start_point(&self, net: &RoadNetwork) -> (f64, f64) {
        net.coords(self.start_node(net))
    }

    pub fn end_point(&self, net: &RoadNetwork) -> (f64, f64) {
        net.coords(self.end_node(net))
    }

    /// Number of consecutive visit pairs whose edges are not head-to-tail
    /// adjacent.
    pub fn gap_count(&self, net: &RoadNetwork) -> usize {
        self.visits
            .windows(2)
            .filter(|w| net.edge(w[0].edge).to != net.edge(w[1].edge).from)
            .count()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LoadReport {
    pub trajectories: usize,
    pub distinct_segments: usize,
    /// Consecutive visits that are not head-to-tail adjacent.
    pub gaps: usize,
}

/// The trajectory dataset, held in ascending id order, together with the
/// network it was matched to.
#[derive(Debug, Clone)]
pub struct TrajectorySet {
    network: Arc<RoadNetwork>,
    trajectories: Vec<Trajectory>,
}

impl TrajectorySet {
    /// Validate and sort by id. Gaps between consecutive edges are allowed
    /// unless `strict_connectivity` is set.
    pub fn new(
        network: Arc<RoadNetwork>,
        mut trajectories: Vec<Trajectory>,
        strict_connectivity: bool,
    ) -> Result<Self> {
        if trajectories.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let mut seen = HashSet::with_capacity(trajectories.len());
        for t in &trajectories {
            if !seen.insert(t.id.as_str()) {
                return Err(Error::DuplicateId {
                    kind: "trajectory",
                    id: t.id.clone(),
                });
            }
            if t.visits.is_empty() {
                return Err(Error::EmptyTrajectory(t.id.clone()));
            }
            for (i, v) in t.visits.iter().enumerate() {
                if v.edge >= network.edges().len() {
                    return Err(Error::UnknownEdge {
                        trajectory: t.id.clone(),
                        line: 0,
                        edge: v.edge.to_string(),
                    });
                }
                if i > 0 {
                    let prev = t.visits[i - 1];
                    if v.t < prev.t || v.t.is_nan() {
                        return Err(Error::DecreasingTimestamp {
                            trajectory: t.id.clone(),
                            line: 0,
                        });
                    }
                    if strict_connectivity && network.edge(prev.edge).to != network.edge(v.edge).from {
                        return Err(Error::Disconnected {
                            trajectory: t.id.clone(),
                            line: 0,
                            edge: network.edge(v.edge).id.clone(),
                        });
                    }
                }
            }
        }
        drop(seen);
        trajectories.sort_by(|a, b| a.id.cmp(&b.id));
        Ok(TrajectorySet {
            network,
            trajectories,
        })
    }

    pub fn network(&self) -> &RoadNetwork {
        &self.network
    }

    pub fn network_arc(&self) -> &Arc<RoadNetwork> {
        &self.network
    }

    pub fn trajectories(&self) -> &[Trajectory] {
        &self.trajectories
    }

    pub fn get(&self, i: usize) -> &Trajectory {
        &self.trajectories[i]
    }

    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }

    pub fn ids(&self) -> Vec<String> {
        self.trajectories.iter().map(|t| t.id.clone()).collect()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.trajectories
            .binary_search_by(|t| t.id.as_str().cmp(id))
            .ok()
    }

    pub fn report(&self) -> LoadReport {
        let mut segments = HashSet::new();
        let mut gaps = 0;
        for t in &self.trajectories {
            segments.extend(t.edges());
            gaps += t.gap_count(&self.network);
        }
        LoadReport {
            trajectories: self.trajectories.len(),
            distinct_segments: segments.len(),
            gaps,
        }
    }

    /// Restrict to the given element indices (ascending ids are preserved).
    pub fn subset(&self, members: &[usize]) -> Result<TrajectorySet> {
        let trajectories = members.iter().map(|&i| self.trajectories[i].clone()).collect();
        TrajectorySet::new(self.network.clone(), trajectories, false)
    }

    /// Long-format CSV `traj_id,seq,timestamp,edge_id`, sorted by
    /// (traj_id, seq).
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = create(path)?;
        let io = |e| Error::io(path, e);
        writeln!(w, "traj_id,seq,timestamp,edge_id").map_err(io)?;
        for t in &self.trajectories {
            for (seq, v) in t.visits.iter().enumerate() {
                writeln!(w, "{},{},{},{}", t.id, seq, v.t, self.network.edge(v.edge).id).map_err(io)?;
            }
        }
        w.flush().map_err(io)
    }
}

#[derive(Deserialize)]
struct VisitRow {
    traj_id: String,
    seq: u64,
    timestamp: f64,
    edge_id: String,
}

/// Load the long-format trajectories CSV against `network`.
///
/// Rows of one trajectory must be contiguous with `seq` counting up from 0.
pub fn load_trajectories(
    path: &Path,
    network: Arc<RoadNetwork>,
    strict_connectivity: bool,
) -> Result<TrajectorySet> {
    let mut trajectories: Vec<Trajectory> = Vec::new();
    let mut seen = HashSet::new();
    let malformed = |line, message: String| Error::Malformed {
        path: path.to_path_buf(),
        line,
        message,
    };

    read_rows(
        path,
        &["traj_id", "seq", "timestamp", "edge_id"],
        |line, row: VisitRow| {
            let edge = network.edge_idx(&row.edge_id).ok_or_else(|| Error::UnknownEdge {
                trajectory: row.traj_id.clone(),
                line,
                edge: row.edge_id.clone(),
            })?;
            let continues = trajectories.last().is_some_and(|t| t.id == row.traj_id);
            if !continues {
                if !seen.insert(row.traj_id.clone()) {
                    return Err(Error::DuplicateId {
                        kind: "trajectory",
                        id: row.traj_id,
                    });
                }
                if row.seq != 0 {
                    return Err(malformed(line, format!("trajectory {} must start at seq 0", row.traj_id)));
                }
                trajectories.push(Trajectory::new(row.traj_id, Vec::new()));
            }
            let t = trajectories.last_mut().expect("pushed above");
            if row.seq != t.visits.len() as u64 {
                return Err(malformed(
                    line,
                    format!("trajectory {}: expected seq {}, got {}", t.id, t.visits.len(), row.seq),
                ));
            }
            if let Some(prev) = t.visits.last() {
                if row.timestamp < prev.t || row.timestamp.is_nan() {
                    return Err(Error::DecreasingTimestamp {
                        trajectory: t.id.clone(),
                        line,
                    });
                }
                if strict_connectivity && network.edge(prev.edge).to != network.edge(edge).from {
                    return Err(Error::Disconnected {
                        trajectory: t.id.clone(),
                        line,
                        edge: row.edge_id,
                    });
                }
            }
            t.visits.push(Visit {
                t: row.timestamp,
                edge,
            });
            Ok(())
        },
    )?;

    TrajectorySet::new(network, trajectories, strict_connectivity)
}
