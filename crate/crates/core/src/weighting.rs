//! Sparse segment profiles of trajectories.
//!
//! Three weightings are supported:
//!
//! * `Spatial`: the share of the trajectory's travelled length spent on the
//!   segment, times `ln(|T| / df(e))`.
//! * `Classic`: occurrence count over trajectory length `n`, times the same
//!   inverse document frequency.
//! * `Binary`: 1 for every distinct segment (Jaccard comparisons).
//!
//! Term frequencies count repeated visits; document frequencies count each
//! trajectory at most once.

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::RoadNetwork;
use crate::trajectory::{Trajectory, TrajectorySet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightingScheme {
    Spatial,
    Classic,
    Binary,
}

/// Document frequencies over the whole dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusStats {
    pub n_trajectories: usize,
    /// Edge index → number of trajectories visiting it at least once.
    pub doc_freq: HashMap<usize, usize>,
}

impl CorpusStats {
    pub fn from_trajectories<'a>(trajectories: impl IntoIterator<Item = &'a Trajectory>) -> Self {
        let mut doc_freq = HashMap::new();
        let mut n = 0;
        for t in trajectories {
            n += 1;
            for e in t.distinct_edges() {
                *doc_freq.entry(e).or_insert(0) += 1;
            }
        }
        CorpusStats {
            n_trajectories: n,
            doc_freq,
        }
    }

    pub fn idf(&self, edge: usize) -> Option<f64> {
        self.doc_freq
            .get(&edge)
            .map(|&df| (self.n_trajectories as f64 / df as f64).ln())
    }
}

pub fn corpus_stats(ts: &TrajectorySet) -> CorpusStats {
    CorpusStats::from_trajectories(ts.trajectories())
}

/// Sparse, non-negative profile of one trajectory. Entries are sorted by edge
/// index and never zero.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    pub owner: String,
    entries: Vec<(usize, f64)>,
    norm: f64,
}

impl WeightVector {
    /// Entries are sorted and zero weights dropped.
    pub fn new(owner: impl Into<String>, mut entries: Vec<(usize, f64)>) -> Self {
        entries.retain(|&(_, w)| w != 0.0);
        entries.sort_by_key(|&(e, _)| e);
        let norm = entries.iter().map(|&(_, w)| w * w).sum::<f64>().sqrt();
        WeightVector {
            owner: owner.into(),
            entries,
            norm,
        }
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn get(&self, edge: usize) -> f64 {
        self.entries
            .binary_search_by_key(&edge, |&(e, _)| e)
            .map(|i| self.entries[i].1)
            .unwrap_or(0.0)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Sparse dot product, summed in ascending edge order.
    pub fn dot(&self, other: &WeightVector) -> f64 {
        let (a, b) = (&self.entries, &other.entries);
        let (mut i, mut j, mut acc) = (0, 0, 0.0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += a[i].1 * b[j].1;
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }
}

pub fn compute_profile(
    t: &Trajectory,
    stats: &CorpusStats,
    scheme: WeightingScheme,
    net: &RoadNetwork,
) -> Result<WeightVector> {
    let mut counts: Vec<(usize, usize)> = Vec::new();
    let mut sorted: Vec<usize> = t.edges().collect();
    sorted.sort_unstable();
    for e in sorted {
        match counts.last_mut() {
            Some((last, c)) if *last == e => *c += 1,
            _ => counts.push((e, 1)),
        }
    }

    let idf = |e: usize| {
        stats
            .idf(e)
            .ok_or_else(|| Error::MissingSegment(net.edge(e).id.clone()))
    };

    let entries = match scheme {
        WeightingScheme::Binary => counts.iter().map(|&(e, _)| (e, 1.0)).collect(),
        WeightingScheme::Spatial => {
            let total: f64 = t.edges().map(|e| net.edge(e).length).sum();
            counts
                .iter()
                .map(|&(e, c)| Ok((e, c as f64 * net.edge(e).length / total * idf(e)?)))
                .collect::<Result<Vec<_>>>()?
        }
        WeightingScheme::Classic => {
            let n = t.len() as f64;
            counts
                .iter()
                .map(|&(e, c)| Ok((e, c as f64 / n * idf(e)?)))
                .collect::<Result<Vec<_>>>()?
        }
    };
    Ok(WeightVector::new(t.id.clone(), entries))
}

/// Profiles of every trajectory in set order.
pub fn compute_profiles(ts: &TrajectorySet, scheme: WeightingScheme) -> Result<Vec<WeightVector>> {
    let stats = corpus_stats(ts);
    let net = ts.network();
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        ts.trajectories()
            .par_iter()
            .map(|t| compute_profile(t, &stats, scheme, net))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        ts.trajectories()
            .iter()
            .map(|t| compute_profile(t, &stats, scheme, net))
            .collect()
    }
}

/// Debug dump `traj_id,edge_id,weight` sorted by (traj_id, edge_id).
pub fn write_profiles_csv(path: &Path, profiles: &[WeightVector], net: &RoadNetwork) -> Result<()> {
    let mut rows: Vec<(&str, &str, f64)> = profiles
        .iter()
        .flat_map(|p| {
            p.entries()
                .iter()
                .map(move |&(e, w)| (p.owner.as_str(), net.edge(e).id.as_str(), w))
        })
        .collect();
    rows.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    let mut w = crate::network::create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(w, "traj_id,edge_id,weight").map_err(io)?;
    for (t, e, v) in rows {
        writeln!(w, "{t},{e},{v}").map_err(io)?;
    }
    w.flush().map_err(io)
}
