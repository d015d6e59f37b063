//! Pairwise trajectory similarity and the sparse similarity graph.
//!
//! Candidate pairs come from an inverted segment index, so only trajectories
//! that share at least one weighted segment are ever compared. An edge is kept
//! when the similarity is strictly above the floor (0 by default).

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trajectory::{Trajectory, TrajectorySet};
use crate::weighting::{compute_profiles, WeightVector, WeightingScheme};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimilarityScheme {
    /// Cosine over length-weighted TF-IDF profiles.
    Spatial,
    /// Cosine over count-based TF-IDF profiles.
    Classic,
    /// Jaccard index over distinct segment sets.
    Jaccard,
}

impl SimilarityScheme {
    pub fn weighting(self) -> WeightingScheme {
        match self {
            SimilarityScheme::Spatial => WeightingScheme::Spatial,
            SimilarityScheme::Classic => WeightingScheme::Classic,
            SimilarityScheme::Jaccard => WeightingScheme::Binary,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SimilarityScheme::Spatial => "spatial",
            SimilarityScheme::Classic => "classic",
            SimilarityScheme::Jaccard => "jaccard",
        }
    }
}

impl std::str::FromStr for SimilarityScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spatial" => Ok(SimilarityScheme::Spatial),
            "classic" => Ok(SimilarityScheme::Classic),
            "jaccard" => Ok(SimilarityScheme::Jaccard),
            other => Err(Error::invalid(format!("unknown weighting `{other}`"))),
        }
    }
}

/// Cosine similarity of two sparse profiles; 0 when either is all zero.
pub fn cosine_similarity(p: &WeightVector, q: &WeightVector) -> f64 {
    if p.norm() == 0.0 || q.norm() == 0.0 {
        return 0.0;
    }
    cosine_from_dot(p.dot(q), p.norm(), q.norm())
}

fn cosine_from_dot(dot: f64, np: f64, nq: f64) -> f64 {
    (dot / (np * nq)).clamp(0.0, 1.0)
}

fn jaccard_from_counts(shared: f64, a: usize, b: usize) -> f64 {
    let union = (a + b) as f64 - shared;
    if union == 0.0 {
        1.0
    } else {
        shared / union
    }
}

/// Jaccard index of the distinct segment sets.
pub fn jaccard_similarity(a: &Trajectory, b: &Trajectory) -> f64 {
    let sa = a.distinct_edges();
    let sb = b.distinct_edges();
    let shared = sa.iter().filter(|e| sb.binary_search(e).is_ok()).count();
    jaccard_from_counts(shared as f64, sa.len(), sb.len())
}

/// Profiles of a dataset under one scheme, ready for pairwise queries.
#[derive(Debug, Clone)]
pub struct SimilarityModel {
    scheme: SimilarityScheme,
    ids: Vec<String>,
    profiles: Vec<WeightVector>,
}

impl SimilarityModel {
    pub fn new(ts: &TrajectorySet, scheme: SimilarityScheme) -> Result<Self> {
        Ok(SimilarityModel {
            scheme,
            ids: ts.ids(),
            profiles: compute_profiles(ts, scheme.weighting())?,
        })
    }

    pub fn scheme(&self) -> SimilarityScheme {
        self.scheme
    }

    pub fn profiles(&self) -> &[WeightVector] {
        &self.profiles
    }

    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }

    pub fn similarity(&self, i: usize, j: usize) -> f64 {
        let (p, q) = (&self.profiles[i], &self.profiles[j]);
        match self.scheme {
            SimilarityScheme::Jaccard => {
                jaccard_from_counts(p.dot(q), p.entries().len(), q.entries().len())
            }
            _ => cosine_similarity(p, q),
        }
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        1.0 - self.similarity(i, j)
    }

    pub fn inverted_index(&self) -> InvertedIndex {
        InvertedIndex::new(&self.profiles)
    }

    /// Similarity graph keeping edges with weight strictly above `floor`.
    pub fn graph(&self, floor: f64) -> SimilarityGraph {
        let index = self.inverted_index();
        let n = self.profiles.len();
        let row = |acc: &mut Vec<f64>, i: usize| -> Vec<(usize, f64)> {
            let p = &self.profiles[i];
            let mut touched = Vec::new();
            for &(e, wi) in p.entries() {
                for &(j, wj) in index.postings(e) {
                    if j <= i {
                        continue;
                    }
                    if acc[j] == 0.0 {
                        touched.push(j);
                    }
                    acc[j] += wi * wj;
                }
            }
            touched.sort_unstable();
            let mut out = Vec::with_capacity(touched.len());
            for j in touched {
                let q = &self.profiles[j];
                let s = match self.scheme {
                    SimilarityScheme::Jaccard => {
                        jaccard_from_counts(acc[j], p.entries().len(), q.entries().len())
                    }
                    _ => cosine_from_dot(acc[j], p.norm(), q.norm()),
                };
                acc[j] = 0.0;
                if s > floor {
                    out.push((j, s));
                }
            }
            out
        };

        #[cfg(feature = "parallel")]
        let rows: Vec<Vec<(usize, f64)>> = {
            use rayon::prelude::*;
            (0..n)
                .into_par_iter()
                .map_init(|| vec![0.0; n], |acc, i| row(acc, i))
                .collect()
        };
        #[cfg(not(feature = "parallel"))]
        let rows: Vec<Vec<(usize, f64)>> = {
            let mut acc = vec![0.0; n];
            (0..n).map(|i| row(&mut acc, i)).collect()
        };

        let edges = rows
            .into_iter()
            .enumerate()
            .flat_map(|(i, r)| r.into_iter().map(move |(j, w)| (i, j, w)));
        SimilarityGraph::from_edges(self.ids.clone(), edges)
            .expect("index-built edges are valid by construction")
    }
}

/// Segment → (trajectory, weight) postings, each list sorted by trajectory.
#[derive(Debug, Clone)]
pub struct InvertedIndex {
    postings: std::collections::HashMap<usize, Vec<(usize, f64)>>,
}

impl InvertedIndex {
    pub fn new(profiles: &[WeightVector]) -> Self {
        let mut postings: std::collections::HashMap<usize, Vec<(usize, f64)>> = Default::default();
        for (i, p) in profiles.iter().enumerate() {
            for &(e, w) in p.entries() {
                postings.entry(e).or_default().push((i, w));
            }
        }
        InvertedIndex { postings }
    }

    pub fn postings(&self, edge: usize) -> &[(usize, f64)] {
        self.postings.get(&edge).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn segments(&self) -> usize {
        self.postings.len()
    }
}

/// Build the similarity graph of a dataset (edge iff similarity > 0).
pub fn build_similarity_graph(ts: &TrajectorySet, scheme: SimilarityScheme) -> Result<SimilarityGraph> {
    Ok(SimilarityModel::new(ts, scheme)?.graph(0.0))
}

/// Weighted undirected graph without self-loops. Adjacency lists are sorted
/// by neighbour.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityGraph {
    node_ids: Vec<String>,
    adjacency: Vec<Vec<(usize, f64)>>,
    degrees: Vec<f64>,
    total_weight_2m: f64,
}

impl SimilarityGraph {
    /// Each undirected edge must be given once, in either orientation.
    pub fn from_edges(
        node_ids: Vec<String>,
        edges: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let n = node_ids.len();
        let mut adjacency = vec![Vec::new(); n];
        for (i, j, w) in edges {
            if i >= n || j >= n {
                return Err(Error::invalid(format!("edge ({i},{j}) out of range")));
            }
            if i == j {
                return Err(Error::invalid(format!("self-loop on node {i}")));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::invalid(format!("edge ({i},{j}) has weight {w}")));
            }
            adjacency[i].push((j, w));
            adjacency[j].push((i, w));
        }
        for (i, list) in adjacency.iter_mut().enumerate() {
            list.sort_by_key(|&(j, _)| j);
            if list.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(Error::invalid(format!("parallel edges at node {i}")));
            }
        }
        let degrees: Vec<f64> = adjacency
            .iter()
            .map(|l| l.iter().map(|&(_, w)| w).sum())
            .collect();
        let total_weight_2m = degrees.iter().sum();
        Ok(SimilarityGraph {
            node_ids,
            adjacency,
            degrees,
            total_weight_2m,
        })
    }

    /// Graph on `n` anonymous nodes named by index.
    pub fn with_anonymous_nodes(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        Self::from_edges((0..n).map(|i| i.to_string()).collect(), edges)
    }

    pub fn node_count(&self) -> usize {
        self.node_ids.len()
    }

    pub fn node_ids(&self) -> &[String] {
        &self.node_ids
    }

    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> f64 {
        self.degrees[i]
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    /// Twice the total edge weight.
    pub fn total_weight_2m(&self) -> f64 {
        self.total_weight_2m
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Undirected edges `(i, j, w)` with `i < j`, sorted.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(i, l)| {
            l.iter()
                .filter(move |&&(j, _)| j > i)
                .map(move |&(j, w)| (i, j, w))
        })
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.adjacency[i]
            .binary_search_by_key(&j, |&(k, _)| k)
            .map(|p| self.adjacency[i][p].1)
            .unwrap_or(0.0)
    }

    /// Subgraph induced by `members` (renumbered in the given order).
    pub fn induced_subgraph(&self, members: &[usize]) -> SimilarityGraph {
        let mut local = std::collections::HashMap::with_capacity(members.len());
        for (k, &m) in members.iter().enumerate() {
            local.insert(m, k);
        }
        let ids = members.iter().map(|&m| self.node_ids[m].clone()).collect();
        let edges: Vec<_> = members
            .iter()
            .enumerate()
            .flat_map(|(a, &m)| {
                let local = &local;
                self.adjacency[m]
                    .iter()
                    .filter_map(move |&(j, w)| local.get(&j).filter(|&&b| b > a).map(|&b| (a, b, w)))
            })
            .collect();
        SimilarityGraph::from_edges(ids, edges).expect("subgraph of a valid graph")
    }

    /// Connected component label of every node, numbered by smallest member.
    pub fn components(&self) -> Vec<usize> {
        let n = self.node_count();
        let mut label = vec![usize::MAX; n];
        let mut next = 0;
        for s in 0..n {
            if label[s] != usize::MAX {
                continue;
            }
            let mut stack = vec![s];
            label[s] = next;
            while let Some(v) = stack.pop() {
                for &(u, _) in &self.adjacency[v] {
                    if label[u] == usize::MAX {
                        label[u] = next;
                        stack.push(u);
                    }
                }
            }
            next += 1;
        }
        label
    }

    /// CSV `traj_i,traj_j,weight`, one row per undirected edge.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut rows: Vec<(&str, &str, f64)> = self
            .edges()
            .map(|(i, j, w)| {
                let (a, b) = (self.node_ids[i].as_str(), self.node_ids[j].as_str());
                if a < b {
                    (a, b, w)
                } else {
                    (b, a, w)
                }
            })
            .collect();
        rows.sort_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
        let mut out = crate::network::create(path)?;
        let io = |e| Error::io(path, e);
        writeln!(out, "traj_i,traj_j,weight").map_err(io)?;
        for (a, b, w) in rows {
            writeln!(out, "{a},{b},{w}").map_err(io)?;
        }
        out.flush().map_err(io)
    }
}
