//! Modularity, greedy agglomerative optimisation, null-model validation and
//! the recursive cluster hierarchy built from them.
//!
//! Modularity of a partition of a weighted graph with total edge weight `m`:
//!
//! ```text
//! Q = Σ_c [ w_in(c) / m − (w_tot(c) / 2m)² ]
//! ```
//!
//! where `w_in(c)` is the weight of edges inside `c` and `w_tot(c)` the sum of
//! weighted degrees of its nodes. `Q = 0` on a graph without edges.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};

use crate::error::{Error, Result};
use crate::partition::Partition;
use crate::similarity::SimilarityGraph;

mod hierarchy;
mod null_model;

pub use hierarchy::{build_hierarchy, ClusterHierarchy, ClusterNode, HierarchyParams};
pub use null_model::{null_test, randomize, validate_partition, NullTest};

pub fn modularity(g: &SimilarityGraph, p: &Partition) -> Result<f64> {
    if p.len() != g.node_count() {
        return Err(Error::PartitionMismatch {
            expected: g.node_count(),
            found: p.len(),
        });
    }
    let m2 = g.total_weight_2m();
    if m2 == 0.0 {
        return Ok(0.0);
    }
    let mut inside = vec![0.0; p.k()];
    let mut total = vec![0.0; p.k()];
    for i in 0..g.node_count() {
        let c = p.community(i);
        total[c] += g.degree(i);
        for &(j, w) in g.neighbors(i) {
            if j > i && p.community(j) == c {
                inside[c] += w;
            }
        }
    }
    Ok(inside
        .iter()
        .zip(&total)
        .map(|(&win, &tot)| community_term(win, tot, m2))
        .sum())
}

/// Contribution of one community to `Q`.
pub(crate) fn community_term(inside: f64, total: f64, m2: f64) -> f64 {
    if m2 == 0.0 {
        return 0.0;
    }
    let a = total / m2;
    2.0 * inside / m2 - a * a
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MergeStep {
    /// Surviving community (the smaller id).
    pub into: usize,
    /// Absorbed community.
    pub from: usize,
    pub delta_q: f64,
}

#[derive(Debug, Clone)]
pub struct GreedyResult {
    pub partition: Partition,
    pub modularity: f64,
    pub merges: Vec<MergeStep>,
}

#[derive(Debug, PartialEq)]
struct Candidate {
    dq: f64,
    i: usize,
    j: usize,
    ver_i: u32,
    ver_j: u32,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    // Largest gain first, then the smallest (i, j).
    fn cmp(&self, other: &Self) -> Ordering {
        self.dq
            .total_cmp(&other.dq)
            .then_with(|| (other.i, other.j).cmp(&(self.i, self.j)))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Agglomerative modularity maximisation from singletons: repeatedly merge
/// the linked community pair with the largest `ΔQ > 0` (ties to the smallest
/// id pair) until no merge improves `Q`.
pub fn greedy_merge(g: &SimilarityGraph) -> GreedyResult {
    let n = g.node_count();
    let m2 = g.total_weight_2m();
    let mut label: Vec<usize> = (0..n).collect();
    let mut merges = Vec::new();

    if m2 > 0.0 {
        let mut a: Vec<f64> = g.degrees().iter().map(|d| d / m2).collect();
        let mut links: Vec<BTreeMap<usize, f64>> = (0..n)
            .map(|i| g.neighbors(i).iter().copied().collect())
            .collect();
        let mut members: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
        let mut alive = vec![true; n];
        let mut version = vec![0u32; n];
        let gain = |w: f64, ai: f64, aj: f64| 2.0 * (w / m2 - ai * aj);

        let mut heap = BinaryHeap::new();
        for (i, j, w) in g.edges() {
            heap.push(Candidate {
                dq: gain(w, a[i], a[j]),
                i,
                j,
                ver_i: 0,
                ver_j: 0,
            });
        }

        while let Some(c) = heap.pop() {
            if !alive[c.i] || !alive[c.j] || version[c.i] != c.ver_i || version[c.j] != c.ver_j {
                continue;
            }
            if c.dq <= 0.0 {
                break;
            }
            let (keep, gone) = (c.i, c.j);
            merges.push(MergeStep {
                into: keep,
                from: gone,
                delta_q: c.dq,
            });

            let absorbed = std::mem::take(&mut links[gone]);
            for (&k, &w) in &absorbed {
                if k == keep {
                    continue;
                }
                links[k].remove(&gone);
                *links[k].entry(keep).or_insert(0.0) += w;
                *links[keep].entry(k).or_insert(0.0) += w;
            }
            links[keep].remove(&gone);
            a[keep] += a[gone];
            alive[gone] = false;
            version[keep] += 1;
            let moved = std::mem::take(&mut members[gone]);
            for &v in &moved {
                label[v] = keep;
            }
            members[keep].extend(moved);

            for (&k, &w) in &links[keep] {
                let (i, j) = if keep < k { (keep, k) } else { (k, keep) };
                heap.push(Candidate {
                    dq: gain(w, a[i], a[j]),
                    i,
                    j,
                    ver_i: version[i],
                    ver_j: version[j],
                });
            }
        }
    }

    let partition = Partition::from_labels(&label);
    let modularity = modularity(g, &partition).expect("partition built over the graph");
    GreedyResult {
        partition,
        modularity,
        merges,
    }
}

pub fn greedy_partition(g: &SimilarityGraph) -> Partition {
    greedy_merge(g).partition
}
