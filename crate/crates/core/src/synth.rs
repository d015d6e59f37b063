//! Seeded synthetic trajectories, optionally with planted corridors.
//!
//! With corridors, trajectory `i` follows corridor `i mod k`: the shortest
//! path between the corridor's origin and destination, where every
//! intermediate node independently triggers a short detour with probability
//! `deviation_prob`. A detour leaves the path by one edge and rejoins one or
//! two path nodes further on within at most two more edges. Without
//! corridors every trajectory gets its own uniformly sampled origin and
//! destination. Timestamps assume a constant 10 m/s from t = 0.

use std::collections::HashSet;
use std::path::Path;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{grid_network, RoadNetwork};
use crate::partition::Partition;
use crate::trajectory::{Trajectory, TrajectorySet};

pub const SPEED_M_PER_S: f64 = 10.0;
pub const MAX_RETRIES: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Corridors {
    None,
    /// `k` origin–destination pairs sampled uniformly from the network.
    Random(usize),
    /// Explicit origin–destination node indices.
    Explicit(Vec<(usize, usize)>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorParams {
    pub n: usize,
    pub corridors: Corridors,
    pub deviation_prob: f64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct Generated {
    pub trajectories: TrajectorySet,
    /// Corridor of every trajectory in set order, when corridors were planted.
    pub labels: Option<Vec<usize>>,
    /// Origin–destination node indices of the planted corridors.
    pub corridors: Vec<(usize, usize)>,
}

impl Generated {
    pub fn label_partition(&self) -> Option<Partition> {
        self.labels.as_deref().map(Partition::from_labels)
    }

    /// Writes `nodes.csv`, `edges.csv`, `trajectories.csv` and, with planted
    /// corridors, `labels.csv` (`traj_id,corridor_id`). Returns the paths
    /// written.
    pub fn write_dataset(&self, dir: &Path) -> Result<Vec<std::path::PathBuf>> {
        use std::io::Write;
        let mut written = Vec::new();
        let (nodes, edges) = (dir.join("nodes.csv"), dir.join("edges.csv"));
        self.trajectories.network().write_csv(&nodes, &edges)?;
        written.extend([nodes, edges]);
        let traj = dir.join("trajectories.csv");
        self.trajectories.write_csv(&traj)?;
        written.push(traj);
        if let Some(labels) = &self.labels {
            let path = dir.join("labels.csv");
            let mut w = crate::network::create(&path)?;
            let io = |e| Error::io(&path, e);
            writeln!(w, "traj_id,corridor_id").map_err(io)?;
            for (t, l) in self.trajectories.trajectories().iter().zip(labels) {
                writeln!(w, "{},{l}", t.id).map_err(io)?;
            }
            w.flush().map_err(io)?;
            written.push(path);
        }
        Ok(written)
    }
}

/// Grid whose `k` planted corridors run along rows `1, 4, 7, …` from the
/// first to the last column. Rows are three apart so that detours of
/// different corridors never share a segment.
pub fn planted_grid(k: usize, cols: usize, spacing: f64) -> Result<(RoadNetwork, Vec<(usize, usize)>)> {
    if k == 0 || cols < 2 {
        return Err(Error::invalid("planted grid needs k ≥ 1 and at least 2 columns"));
    }
    let net = grid_network(3 * k, cols, spacing)?;
    let corridors = (0..k)
        .map(|i| {
            let row = 3 * i + 1;
            (row * cols, row * cols + cols - 1)
        })
        .collect();
    Ok((net, corridors))
}

pub fn generate(net: Arc<RoadNetwork>, params: &GeneratorParams) -> Result<Generated> {
    if params.n < 1 {
        return Err(Error::invalid("need at least one trajectory"));
    }
    if !(0.0..=1.0).contains(&params.deviation_prob) {
        return Err(Error::invalid("deviation probability must lie in [0, 1]"));
    }
    if net.nodes().len() < 2 {
        return Err(Error::invalid("network needs at least two nodes"));
    }
    let mut rng = crate::seed::rng(params.seed, "generator");
    let width = params.n.to_string().len();
    let name = |i: usize| format!("t{i:0width$}");

    let mut trajectories = Vec::with_capacity(params.n);
    let (labels, corridors) = match &params.corridors {
        Corridors::None => {
            for i in 0..params.n {
                let path = sample_route(&net, &mut rng)?;
                let edges = perturb(&net, &path, params.deviation_prob, &mut rng);
                trajectories.push(Trajectory::from_edges(name(i), &edges, &net, SPEED_M_PER_S));
            }
            (None, Vec::new())
        }
        spec => {
            let (ods, routes) = match spec {
                Corridors::Random(k) => {
                    if *k == 0 {
                        return Err(Error::invalid("corridor count must be positive"));
                    }
                    let mut ods = Vec::new();
                    let mut routes = Vec::new();
                    for _ in 0..*k {
                        let (od, route) = sample_od(&net, &mut rng)?;
                        ods.push(od);
                        routes.push(route);
                    }
                    (ods, routes)
                }
                Corridors::Explicit(ods) => {
                    let mut routes = Vec::new();
                    for &(o, d) in ods {
                        if o >= net.nodes().len() || d >= net.nodes().len() {
                            return Err(Error::invalid(format!("corridor ({o}, {d}) outside the network")));
                        }
                        let route = net.shortest_path_idx(o, d).filter(|r| !r.is_empty()).ok_or_else(|| {
                            Error::Unreachable {
                                from: net.node(o).id.clone(),
                                to: net.node(d).id.clone(),
                                attempts: 1,
                            }
                        })?;
                        routes.push(route);
                    }
                    if routes.is_empty() {
                        return Err(Error::invalid("corridor list is empty"));
                    }
                    (ods.clone(), routes)
                }
                Corridors::None => unreachable!(),
            };
            let mut labels = Vec::with_capacity(params.n);
            for i in 0..params.n {
                let c = i % routes.len();
                let edges = perturb(&net, &routes[c], params.deviation_prob, &mut rng);
                trajectories.push(Trajectory::from_edges(name(i), &edges, &net, SPEED_M_PER_S));
                labels.push(c);
            }
            (Some(labels), ods)
        }
    };

    let trajectories = TrajectorySet::new(net, trajectories, true)?;
    Ok(Generated {
        trajectories,
        labels,
        corridors,
    })
}

fn sample_od(net: &RoadNetwork, rng: &mut ChaCha8Rng) -> Result<((usize, usize), Vec<usize>)> {
    let n = net.nodes().len();
    let (mut o, mut d) = (0, 0);
    for _ in 0..MAX_RETRIES {
        o = rng.gen_range(0..n);
        d = rng.gen_range(0..n);
        if o == d {
            continue;
        }
        if let Some(route) = net.shortest_path_idx(o, d) {
            return Ok(((o, d), route));
        }
    }
    Err(Error::Unreachable {
        from: net.node(o).id.clone(),
        to: net.node(d).id.clone(),
        attempts: MAX_RETRIES,
    })
}

fn sample_route(net: &RoadNetwork, rng: &mut ChaCha8Rng) -> Result<Vec<usize>> {
    sample_od(net, rng).map(|(_, r)| r)
}

/// Apply random detours to `route`.
fn perturb(net: &RoadNetwork, route: &[usize], p: f64, rng: &mut ChaCha8Rng) -> Vec<usize> {
    if p == 0.0 {
        return route.to_vec();
    }
    let mut path_nodes: Vec<usize> = route.iter().map(|&e| net.edge(e).from).collect();
    path_nodes.push(net.edge(route[route.len() - 1]).to);
    let on_path: HashSet<usize> = path_nodes.iter().copied().collect();
    let last = route.len();

    let mut out = Vec::with_capacity(route.len() + 4);
    let mut i = 0;
    while i < last {
        if i > 0 && rng.gen_bool(p) {
            let options = detours(net, &path_nodes, &on_path, i, route[i]);
            if let Some((edges, rejoin)) = options.choose(rng) {
                out.extend_from_slice(edges);
                i = *rejoin;
                continue;
            }
        }
        out.push(route[i]);
        i += 1;
    }
    out
}

/// Every way to leave the path at node `path[i]` and rejoin at `path[i+1]`
/// or `path[i+2]` within two further edges, in a fixed enumeration order.
fn detours(
    net: &RoadNetwork,
    path: &[usize],
    on_path: &HashSet<usize>,
    i: usize,
    path_edge: usize,
) -> Vec<(Vec<usize>, usize)> {
    let targets: Vec<usize> = (i + 1..=(i + 2).min(path.len() - 1)).collect();
    let mut options = Vec::new();
    for &leave in net.out_edges(path[i]) {
        let w = net.edge(leave).to;
        if leave == path_edge || on_path.contains(&w) {
            continue;
        }
        for &e1 in net.out_edges(w) {
            let x = net.edge(e1).to;
            if let Some(&j) = targets.iter().find(|&&j| path[j] == x) {
                options.push((vec![leave, e1], j));
                continue;
            }
            if on_path.contains(&x) || x == w {
                continue;
            }
            for &e2 in net.out_edges(x) {
                let y = net.edge(e2).to;
                if let Some(&j) = targets.iter().find(|&&j| path[j] == y) {
                    options.push((vec![leave, e1, e2], j));
                }
            }
        }
    }
    options
}
