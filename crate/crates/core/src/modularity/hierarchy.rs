//! Recursive splitting into a hierarchy of nested clusters, and the two ways
//! of flattening it.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{community_term, greedy_merge, null_model::null_test};
use crate::error::{Error, Result};
use crate::partition::Partition;
use crate::similarity::SimilarityGraph;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HierarchyParams {
    /// Randomised graphs per null-model test.
    pub replicates: usize,
    /// Required z-score of the observed modularity over the null.
    pub z: f64,
    pub seed: u64,
    /// Clusters smaller than this are not split.
    pub min_size: usize,
}

impl Default for HierarchyParams {
    fn default() -> Self {
        HierarchyParams {
            replicates: 20,
            z: 2.0,
            seed: 0,
            min_size: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterNode {
    /// Breadth-first id; the root is 0.
    pub id: usize,
    pub depth: usize,
    pub parent: Option<usize>,
    /// Graph node indices, ascending.
    pub members: Vec<usize>,
    pub children: Vec<usize>,
    /// Modularity of the greedy split found on this cluster's induced
    /// subgraph, whether or not it was accepted.
    pub modularity_of_split: Option<f64>,
    /// Whether that split was accepted.
    pub validated: bool,
}

impl ClusterNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterHierarchy {
    nodes: Vec<ClusterNode>,
    n: usize,
}

/// Split the graph recursively: at every cluster run greedy modularity
/// merging on its induced subgraph and keep the split if it has at least two
/// communities and passes validation. A split along disconnected pieces (no
/// edge weight between its communities) is kept without a null-model test;
/// any other split must pass [`null_test`].
pub fn build_hierarchy(g: &SimilarityGraph, params: &HierarchyParams) -> Result<ClusterHierarchy> {
    if params.replicates < 2 {
        return Err(Error::invalid(format!(
            "null-model validation needs at least 2 replicates, got {}",
            params.replicates
        )));
    }
    let n = g.node_count();
    let mut nodes = vec![ClusterNode {
        id: 0,
        depth: 0,
        parent: None,
        members: (0..n).collect(),
        children: Vec::new(),
        modularity_of_split: None,
        validated: false,
    }];
    let mut queue = VecDeque::from([0usize]);

    while let Some(id) = queue.pop_front() {
        let members = nodes[id].members.clone();
        if members.len() < params.min_size.max(2) {
            continue;
        }
        let sub = g.induced_subgraph(&members);
        let split = greedy_merge(&sub);
        if split.partition.k() < 2 {
            continue;
        }
        nodes[id].modularity_of_split = Some(split.modularity);

        let disconnected = sub
            .edges()
            .all(|(i, j, _)| split.partition.community(i) == split.partition.community(j));
        let accepted = disconnected || {
            let seed = crate::seed::derive(params.seed, &format!("cluster/{id}"));
            null_test(&sub, &split.partition, params.replicates, params.z, seed)?.accepted
        };
        if !accepted {
            continue;
        }
        nodes[id].validated = true;

        let depth = nodes[id].depth + 1;
        for local in split.partition.clusters() {
            let child = nodes.len();
            nodes.push(ClusterNode {
                id: child,
                depth,
                parent: Some(id),
                members: local.iter().map(|&l| members[l]).collect(),
                children: Vec::new(),
                modularity_of_split: None,
                validated: false,
            });
            nodes[id].children.push(child);
            queue.push_back(child);
        }
    }

    let h = ClusterHierarchy { nodes, n };
    h.check()?;
    Ok(h)
}

impl ClusterHierarchy {
    pub fn root(&self) -> &ClusterNode {
        &self.nodes[0]
    }

    pub fn nodes(&self) -> &[ClusterNode] {
        &self.nodes
    }

    pub fn node(&self, id: usize) -> &ClusterNode {
        &self.nodes[id]
    }

    /// Number of clustered elements.
    pub fn element_count(&self) -> usize {
        self.n
    }

    pub fn max_depth(&self) -> usize {
        self.nodes.iter().map(|c| c.depth).max().unwrap_or(0)
    }

    /// Number of levels including the root level.
    pub fn level_count(&self) -> usize {
        self.max_depth() + 1
    }

    pub fn leaves(&self) -> impl Iterator<Item = &ClusterNode> {
        self.nodes.iter().filter(|c| c.is_leaf())
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves().count()
    }

    /// Verify that the root holds every element and that children always
    /// partition their parent.
    pub fn check(&self) -> Result<()> {
        let root = self.root();
        if root.members.len() != self.n || root.members.iter().enumerate().any(|(i, &m)| i != m) {
            return Err(Error::invalid("root does not hold every element"));
        }
        for c in &self.nodes {
            if c.children.is_empty() {
                continue;
            }
            let mut union: Vec<usize> = c
                .children
                .iter()
                .flat_map(|&k| self.nodes[k].members.iter().copied())
                .collect();
            union.sort_unstable();
            if union != c.members {
                return Err(Error::invalid(format!(
                    "children of cluster {} do not partition it",
                    c.id
                )));
            }
            if c.children.iter().any(|&k| self.nodes[k].members.is_empty()) {
                return Err(Error::invalid(format!("cluster {} has an empty child", c.id)));
            }
        }
        Ok(())
    }

    /// Clusters at depth `level`, plus leaves that end above it. Returned in
    /// id order.
    pub fn level_clusters(&self, level: usize) -> Vec<usize> {
        self.nodes
            .iter()
            .filter(|c| c.depth == level || (c.depth < level && c.is_leaf()))
            .map(|c| c.id)
            .collect()
    }

    pub fn flatten_by_level(&self, level: usize) -> Partition {
        self.partition_of(&self.level_clusters(level))
    }

    /// Partition whose clusters are the given hierarchy nodes, in that order.
    pub fn partition_of(&self, clusters: &[usize]) -> Partition {
        let lists: Vec<Vec<usize>> = clusters.iter().map(|&c| self.nodes[c].members.clone()).collect();
        Partition::from_clusters(self.n, &lists).expect("hierarchy clusters partition the elements")
    }

    /// Expand from the root, each time splitting the cluster whose
    /// replacement by its children changes `Q` (on the full graph) the most
    /// favourably, until at least `k` clusters exist or nothing is left to
    /// split. Returns the cluster ids, ascending, and the expansion order.
    pub fn greedy_expand_trace(&self, g: &SimilarityGraph, k: usize) -> Result<(Vec<usize>, Vec<usize>)> {
        let leaves = self.leaf_count();
        if k == 0 || k > leaves {
            return Err(Error::invalid(format!(
                "target cluster count {k} outside 1..={leaves}"
            )));
        }
        if g.node_count() != self.n {
            return Err(Error::PartitionMismatch {
                expected: g.node_count(),
                found: self.n,
            });
        }
        let terms = self.community_terms(g);
        let gain = |c: &ClusterNode| {
            c.children.iter().map(|&k| terms[k]).sum::<f64>() - terms[c.id]
        };

        let mut current = vec![0usize];
        let mut order = Vec::new();
        while current.len() < k {
            let best = current
                .iter()
                .enumerate()
                .filter(|(_, &c)| !self.nodes[c].is_leaf())
                .map(|(pos, &c)| (pos, c, gain(&self.nodes[c])))
                .fold(None::<(usize, usize, f64)>, |best, cand| match best {
                    Some(b) if b.2 > cand.2 || (b.2 == cand.2 && b.1 < cand.1) => Some(b),
                    _ => Some(cand),
                });
            let Some((pos, c, _)) = best else { break };
            current.swap_remove(pos);
            current.extend(self.nodes[c].children.iter().copied());
            order.push(c);
        }
        current.sort_unstable();
        Ok((current, order))
    }

    pub fn greedy_expand(&self, g: &SimilarityGraph, k: usize) -> Result<Partition> {
        let (clusters, _) = self.greedy_expand_trace(g, k)?;
        Ok(self.partition_of(&clusters))
    }

    /// Modularity contribution of every hierarchy node on `g`.
    fn community_terms(&self, g: &SimilarityGraph) -> Vec<f64> {
        let m2 = g.total_weight_2m();
        let mut mark = vec![usize::MAX; self.n];
        self.nodes
            .iter()
            .map(|c| {
                for &m in &c.members {
                    mark[m] = c.id;
                }
                let mut inside = 0.0;
                let mut total = 0.0;
                for &i in &c.members {
                    total += g.degree(i);
                    for &(j, w) in g.neighbors(i) {
                        if j > i && mark[j] == c.id {
                            inside += w;
                        }
                    }
                }
                community_term(inside, total, m2)
            })
            .collect()
    }

    /// Nested JSON: `{id, size, validated, modularity_of_split, children,
    /// members}` with `members` listed at leaves only.
    pub fn to_json(&self, ids: &[String]) -> Value {
        self.node_json(0, ids)
    }

    fn node_json(&self, id: usize, ids: &[String]) -> Value {
        let c = &self.nodes[id];
        let children: Vec<Value> = c.children.iter().map(|&k| self.node_json(k, ids)).collect();
        let mut v = json!({
            "id": c.id,
            "size": c.members.len(),
            "validated": c.validated,
            "modularity_of_split": c.modularity_of_split,
            "children": children,
        });
        if c.is_leaf() {
            v["members"] = c.members.iter().map(|&m| Value::from(ids[m].clone())).collect();
        }
        v
    }

    /// Build a hierarchy directly from nested member lists. Used for
    /// fixtures; `children` lists refer to positions in `spec`, parents first.
    pub fn from_spec(n: usize, spec: &[(Vec<usize>, Vec<usize>)]) -> Result<ClusterHierarchy> {
        let mut nodes: Vec<ClusterNode> = spec
            .iter()
            .enumerate()
            .map(|(id, (members, children))| {
                let mut members = members.clone();
                members.sort_unstable();
                ClusterNode {
                    id,
                    depth: 0,
                    parent: None,
                    members,
                    children: children.clone(),
                    modularity_of_split: None,
                    validated: !children.is_empty(),
                }
            })
            .collect();
        for id in 0..nodes.len() {
            for k in nodes[id].children.clone() {
                if k <= id || k >= nodes.len() || nodes[k].parent.is_some() {
                    return Err(Error::invalid(format!("bad child {k} of {id}")));
                }
                nodes[k].parent = Some(id);
                nodes[k].depth = nodes[id].depth + 1;
            }
        }
        if nodes.iter().skip(1).any(|c| c.parent.is_none()) {
            return Err(Error::invalid("every non-root cluster needs a parent"));
        }
        let h = ClusterHierarchy { nodes, n };
        h.check()?;
        Ok(h)
    }
}
