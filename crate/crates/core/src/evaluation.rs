//! Partition quality: length-weighted overlap within and across clusters,
//! start/end point inertia, and the adjusted Rand index.
//!
//! Overlap between two trajectories is asymmetric:
//!
//! ```text
//! overlap(T, T') = Σ_{e ∈ T ∩ T'} length(e) / Σ_{e ∈ T} length(e)
//! ```
//!
//! over distinct segments. The intraclass sum runs over ordered pairs of
//! distinct trajectories of a cluster, scaled by `1/|C|`; the interclass sum
//! runs over ordered pairs (T in C, T' outside C), scaled by `1/(|𝒯| − |C|)`.

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::RoadNetwork;
use crate::partition::Partition;
use crate::trajectory::{Trajectory, TrajectorySet};

pub fn pair_overlap(t: &Trajectory, other: &Trajectory, net: &RoadNetwork) -> f64 {
    let a = t.distinct_edges();
    let b = other.distinct_edges();
    let total: f64 = a.iter().map(|&e| net.edge(e).length).sum();
    let shared: f64 = a
        .iter()
        .filter(|e| b.binary_search(e).is_ok())
        .map(|&e| net.edge(e).length)
        .sum();
    shared / total
}

/// Distinct segments and their total length, per trajectory.
struct SegmentSets {
    sets: Vec<Vec<usize>>,
    totals: Vec<f64>,
}

impl SegmentSets {
    fn new(ts: &TrajectorySet) -> Self {
        let net = ts.network();
        let sets: Vec<Vec<usize>> = ts.trajectories().iter().map(Trajectory::distinct_edges).collect();
        let totals = sets
            .iter()
            .map(|s| s.iter().map(|&e| net.edge(e).length).sum())
            .collect();
        SegmentSets { sets, totals }
    }

    /// Σ over `T' ≠ T` in the group (counted by `counts`) of overlap(T, T').
    fn row_sum(&self, t: usize, counts: &HashMap<usize, usize>, net: &RoadNetwork) -> f64 {
        let shared: f64 = self.sets[t]
            .iter()
            .map(|&e| net.edge(e).length * (counts[&e] - 1) as f64)
            .sum();
        shared / self.totals[t]
    }
}

fn check_cover(p: &Partition, ts: &TrajectorySet) -> Result<()> {
    if p.len() != ts.len() {
        return Err(Error::PartitionMismatch {
            expected: ts.len(),
            found: p.len(),
        });
    }
    Ok(())
}

fn segment_counts<'a>(sets: impl Iterator<Item = &'a Vec<usize>>) -> HashMap<usize, usize> {
    let mut counts = HashMap::new();
    for s in sets {
        for &e in s {
            *counts.entry(e).or_insert(0) += 1;
        }
    }
    counts
}

/// Per-trajectory sums of overlap with the other members of its own cluster,
/// and with every other trajectory.
fn overlap_sums(p: &Partition, ts: &TrajectorySet) -> (Vec<f64>, Vec<f64>) {
    let net = ts.network();
    let seg = SegmentSets::new(ts);
    let all = segment_counts(seg.sets.iter());
    let mut within = vec![0.0; ts.len()];
    let mut everyone = vec![0.0; ts.len()];
    for members in p.clusters() {
        let counts = segment_counts(members.iter().map(|&m| &seg.sets[m]));
        for &m in &members {
            within[m] = seg.row_sum(m, &counts, net);
        }
    }
    for (t, slot) in everyone.iter_mut().enumerate() {
        *slot = seg.row_sum(t, &all, net);
    }
    (within, everyone)
}

pub fn intraclass_overlap(p: &Partition, ts: &TrajectorySet) -> Result<f64> {
    check_cover(p, ts)?;
    let (within, _) = overlap_sums(p, ts);
    Ok(p.clusters()
        .iter()
        .map(|c| c.iter().map(|&m| within[m]).sum::<f64>() / c.len() as f64)
        .sum())
}

pub fn interclass_overlap(p: &Partition, ts: &TrajectorySet) -> Result<f64> {
    check_cover(p, ts)?;
    let (within, everyone) = overlap_sums(p, ts);
    let n = ts.len();
    Ok(p.clusters()
        .iter()
        .filter(|c| c.len() < n)
        .map(|c| {
            let across: f64 = c.iter().map(|&m| everyone[m] - within[m]).sum();
            across / (n - c.len()) as f64
        })
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Inertia {
    pub intra: f64,
    pub inter: f64,
    pub total: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Endpoint {
    Start,
    End,
}

/// Within-cluster, between-cluster and total sums of squared distances of
/// the start (or end) points to their means.
pub fn inertia(p: &Partition, ts: &TrajectorySet, which: Endpoint) -> Result<Inertia> {
    check_cover(p, ts)?;
    let net = ts.network();
    let points: Vec<(f64, f64)> = ts
        .trajectories()
        .iter()
        .map(|t| match which {
            Endpoint::Start => t.start_point(net),
            Endpoint::End => t.end_point(net),
        })
        .collect();
    Ok(point_inertia(p, &points))
}

pub fn point_inertia(p: &Partition, points: &[(f64, f64)]) -> Inertia {
    let mean = |idx: &mut dyn Iterator<Item = usize>| {
        let (mut sx, mut sy, mut c) = (0.0, 0.0, 0usize);
        for i in idx {
            sx += points[i].0;
            sy += points[i].1;
            c += 1;
        }
        (sx / c as f64, sy / c as f64)
    };
    let sq = |a: (f64, f64), b: (f64, f64)| (a.0 - b.0).powi(2) + (a.1 - b.1).powi(2);

    let global = mean(&mut (0..points.len()));
    let total = points.iter().map(|&pt| sq(pt, global)).sum();
    let (mut intra, mut inter) = (0.0, 0.0);
    for members in p.clusters() {
        let mu = mean(&mut members.iter().copied());
        intra += members.iter().map(|&m| sq(points[m], mu)).sum::<f64>();
        inter += members.len() as f64 * sq(mu, global);
    }
    Inertia { intra, inter, total }
}

fn choose2(x: u64) -> f64 {
    (x * x.saturating_sub(1) / 2) as f64
}

/// Adjusted Rand index (Hubert–Arabie). Two partitions with no pair
/// structure to compare (both all-singletons or both one cluster) score 1.
pub fn adjusted_rand_index(p: &Partition, q: &Partition) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::PartitionMismatch {
            expected: p.len(),
            found: q.len(),
        });
    }
    let n = p.len() as u64;
    let mut table: HashMap<(usize, usize), u64> = HashMap::new();
    for (&a, &b) in p.assignment().iter().zip(q.assignment()) {
        *table.entry((a, b)).or_insert(0) += 1;
    }
    let index: f64 = table.values().map(|&c| choose2(c)).sum();
    let rows: f64 = p.sizes().iter().map(|&s| choose2(s as u64)).sum();
    let cols: f64 = q.sizes().iter().map(|&s| choose2(s as u64)).sum();
    let total = choose2(n);
    if total == 0.0 {
        return Ok(1.0);
    }
    let expected = rows * cols / total;
    let max = (rows + cols) / 2.0;
    if max == expected {
        return Ok(1.0);
    }
    Ok((index - expected) / (max - expected))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub method: String,
    pub k: usize,
    pub intraclass_overlap: f64,
    pub interclass_overlap: f64,
    pub start: Inertia,
    pub end: Inertia,
    pub ari: Option<f64>,
}

pub fn evaluate(method: &str, p: &Partition, ts: &TrajectorySet, truth: Option<&Partition>) -> Result<EvaluationReport> {
    Ok(EvaluationReport {
        method: method.to_string(),
        k: p.k(),
        intraclass_overlap: intraclass_overlap(p, ts)?,
        interclass_overlap: interclass_overlap(p, ts)?,
        start: inertia(p, ts, Endpoint::Start)?,
        end: inertia(p, ts, Endpoint::End)?,
        ari: truth.map(|t| adjusted_rand_index(p, t)).transpose()?,
    })
}

pub const REPORT_HEADER: &str = "method,k,intraclass_overlap,interclass_overlap,\
start_intra_inertia,start_inter_inertia,start_total_inertia,\
end_intra_inertia,end_inter_inertia,end_total_inertia,ari";

/// One row per report, header first. ARI is empty when no labels were given.
pub fn write_report_csv(path: &Path, reports: &[EvaluationReport]) -> Result<()> {
    let mut w = crate::network::create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(w, "{REPORT_HEADER}").map_err(io)?;
    for r in reports {
        let ari = r.ari.map(|a| a.to_string()).unwrap_or_default();
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.method,
            r.k,
            r.intraclass_overlap,
            r.interclass_overlap,
            r.start.intra,
            r.start.inter,
            r.start.total,
            r.end.intra,
            r.end.inter,
            r.end.total,
            ari
        )
        .map_err(io)?;
    }
    w.flush().map_err(io)
}
