use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};

/// Flat assignment of `n` elements to `k` non-empty communities with dense
/// ids `0..k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    assignment: Vec<usize>,
    k: usize,
}

impl Partition {
    /// Build from arbitrary labels; ids are renumbered densely in order of
    /// first appearance.
    pub fn from_labels<L: Eq + std::hash::Hash>(labels: &[L]) -> Self {
        let mut map = HashMap::new();
        let assignment = labels
            .iter()
            .map(|l| {
                let next = map.len();
                *map.entry(l).or_insert(next)
            })
            .collect();
        Partition {
            assignment,
            k: map.len(),
        }
    }

    /// Build from explicit member lists. Each of `0..n` must appear exactly
    /// once across all clusters; cluster `i` gets id `i` after dropping empty
    /// lists.
    pub fn from_clusters(n: usize, clusters: &[Vec<usize>]) -> Result<Self> {
        let mut assignment = vec![usize::MAX; n];
        let mut k = 0;
        for members in clusters.iter().filter(|c| !c.is_empty()) {
            for &m in members {
                if m >= n || assignment[m] != usize::MAX {
                    return Err(Error::invalid(format!(
                        "element {m} is out of range or assigned twice"
                    )));
                }
                assignment[m] = k;
            }
            k += 1;
        }
        if assignment.contains(&usize::MAX) {
            return Err(Error::PartitionMismatch {
                expected: n,
                found: assignment.iter().filter(|&&a| a != usize::MAX).count(),
            });
        }
        Ok(Partition { assignment, k })
    }

    pub fn singletons(n: usize) -> Self {
        Partition {
            assignment: (0..n).collect(),
            k: n,
        }
    }

    pub fn single(n: usize) -> Self {
        Partition {
            assignment: vec![0; n],
            k: usize::from(n > 0),
        }
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    /// Number of non-empty communities.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn community(&self, element: usize) -> usize {
        self.assignment[element]
    }

    /// Members per community, each list ascending.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.k];
        for (i, &c) in self.assignment.iter().enumerate() {
            out[c].push(i);
        }
        out
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut out = vec![0; self.k];
        for &c in &self.assignment {
            out[c] += 1;
        }
        out
    }

    /// True when every community of `self` lies inside one community of
    /// `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        if self.len() != coarser.len() {
            return false;
        }
        let mut parent = vec![usize::MAX; self.k];
        self.assignment
            .iter()
            .zip(&coarser.assignment)
            .all(|(&f, &c)| {
                if parent[f] == usize::MAX {
                    parent[f] = c;
                }
                parent[f] == c
            })
    }

    /// Same grouping, possibly under different ids.
    pub fn same_grouping(&self, other: &Partition) -> bool {
        self.k == other.k && self.refines(other) && other.refines(self)
    }
}

/// Write `traj_id,cluster_id` rows in element order.
pub fn write_assignment_csv(path: &Path, ids: &[String], partition: &Partition) -> Result<()> {
    if ids.len() != partition.len() {
        return Err(Error::PartitionMismatch {
            expected: ids.len(),
            found: partition.len(),
        });
    }
    let mut w = crate::network::create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(w, "traj_id,cluster_id").map_err(io)?;
    for (id, &c) in ids.iter().zip(partition.assignment()) {
        writeln!(w, "{id},{c}").map_err(io)?;
    }
    w.flush().map_err(io)
}

#[derive(Deserialize)]
struct AssignmentRow {
    traj_id: String,
    cluster_id: String,
}

/// Read a two-column label file (`traj_id,<label_column>`) and align it with
/// `ids`. Every id must appear exactly once.
pub fn read_labels_csv(path: &Path, label_column: &str, ids: &[String]) -> Result<Partition> {
    let index: HashMap<&str, usize> = ids.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let mut labels: Vec<Option<String>> = vec![None; ids.len()];
    let mut reader = crate::network::csv_reader(path)?;
    let headers = reader
        .headers()
        .map_err(|e| crate::network::malformed(path, e))?
        .clone();
    if headers.len() != 2 || &headers[0] != "traj_id" || &headers[1] != label_column {
        return Err(Error::Malformed {
            path: path.to_path_buf(),
            line: 1,
            message: format!("expected header `traj_id,{label_column}`"),
        });
    }
    for record in reader.records() {
        let record = record.map_err(|e| crate::network::malformed(path, e))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let row = AssignmentRow {
            traj_id: record[0].to_string(),
            cluster_id: record[1].to_string(),
        };
        let Some(&i) = index.get(row.traj_id.as_str()) else {
            return Err(Error::Malformed {
                path: path.to_path_buf(),
                line,
                message: format!("unknown trajectory id {}", row.traj_id),
            });
        };
        if labels[i].replace(row.cluster_id).is_some() {
            return Err(Error::DuplicateId {
                kind: "assignment",
                id: row.traj_id,
            });
        }
    }
    let found = labels.iter().filter(|l| l.is_some()).count();
    if found != ids.len() {
        return Err(Error::PartitionMismatch {
            expected: ids.len(),
            found,
        });
    }
    let labels: Vec<String> = labels.into_iter().flatten().collect();
    Ok(Partition::from_labels(&labels))
}
