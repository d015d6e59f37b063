//! Directed road network: intersections with planar coordinates and road
//! segments with lengths in meters.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::io::Write;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: String,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub id: String,
    /// Index of the tail node.
    pub from: usize,
    /// Index of the head node.
    pub to: usize,
    pub length: f64,
}

/// Input description of a directed edge, referring to nodes by id.
#[derive(Debug, Clone)]
pub struct EdgeSpec {
    pub id: String,
    pub from: String,
    pub to: String,
    pub length: f64,
}

/// Validated, immutable directed road network.
///
/// Edges are stored sorted by id, so an edge index order is the same as the
/// lexicographic order of edge ids. Everything downstream that iterates "in
/// edge order" relies on that.
#[derive(Debug, Clone)]
pub struct RoadNetwork {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    node_index: HashMap<String, usize>,
    edge_index: HashMap<String, usize>,
    out_edges: Vec<Vec<usize>>,
    in_edges: Vec<Vec<usize>>,
}

impl RoadNetwork {
    pub fn new(nodes: Vec<Node>, edges: Vec<EdgeSpec>) -> Result<Self> {
        let mut node_index = HashMap::with_capacity(nodes.len());
        for (i, n) in nodes.iter().enumerate() {
            if node_index.insert(n.id.clone(), i).is_some() {
                return Err(Error::DuplicateId {
                    kind: "node",
                    id: n.id.clone(),
                });
            }
        }

        let mut resolved = Vec::with_capacity(edges.len());
        for e in edges {
            let lookup = |id: &str| {
                node_index.get(id).copied().ok_or_else(|| Error::DanglingNode {
                    edge: e.id.clone(),
                    node: id.to_string(),
                })
            };
            let from = lookup(&e.from)?;
            let to = lookup(&e.to)?;
            if !(e.length.is_finite() && e.length > 0.0) {
                return Err(Error::NonPositiveLength {
                    edge: e.id,
                    length: e.length,
                });
            }
            resolved.push(Edge {
                id: e.id,
                from,
                to,
                length: e.length,
            });
        }
        resolved.sort_by(|a, b| a.id.cmp(&b.id));
        if let Some(w) = resolved.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(Error::DuplicateId {
                kind: "edge",
                id: w[0].id.clone(),
            });
        }

        let edge_index = resolved
            .iter()
            .enumerate()
            .map(|(i, e)| (e.id.clone(), i))
            .collect();
        let mut out_edges = vec![Vec::new(); nodes.len()];
        let mut in_edges = vec![Vec::new(); nodes.len()];
        for (i, e) in resolved.iter().enumerate() {
            out_edges[e.from].push(i);
            in_edges[e.to].push(i);
        }

        Ok(RoadNetwork {
            nodes,
            edges: resolved,
            node_index,
            edge_index,
            out_edges,
            in_edges,
        })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node(&self, idx: usize) -> &Node {
        &self.nodes[idx]
    }

    pub fn edge(&self, idx: usize) -> &Edge {
        &self.edges[idx]
    }

    pub fn node_idx(&self, id: &str) -> Option<usize> {
        self.node_index.get(id).copied()
    }

    pub fn edge_idx(&self, id: &str) -> Option<usize> {
        self.edge_index.get(id).copied()
    }

    /// Outgoing edge indices of a node, in ascending edge order.
    pub fn out_edges(&self, node: usize) -> &[usize] {
        &self.out_edges[node]
    }

    pub fn in_edges(&self, node: usize) -> &[usize] {
        &self.in_edges[node]
    }

    pub fn coords(&self, node: usize) -> (f64, f64) {
        let n = &self.nodes[node];
        (n.x, n.y)
    }

    /// Shortest directed path between two nodes by id.
    pub fn shortest_path(&self, from: &str, to: &str) -> Result<Option<Vec<usize>>> {
        let s = self
            .node_idx(from)
            .ok_or_else(|| Error::UnknownNode(from.to_string()))?;
        let t = self
            .node_idx(to)
            .ok_or_else(|| Error::UnknownNode(to.to_string()))?;
        Ok(self.shortest_path_idx(s, t))
    }

    /// Minimum-length directed path as edge indices, `None` when `to` is not
    /// reachable. Among equal-length paths the lexicographically smallest
    /// edge-id sequence wins.
    pub fn shortest_path_idx(&self, from: usize, to: usize) -> Option<Vec<usize>> {
        if from == to {
            return Some(Vec::new());
        }
        // Distances to `to` over reversed edges, then walk forward from `from`
        // picking the smallest tight edge at every step.
        let dist = self.distances_to(to);
        if !dist[from].is_finite() {
            return None;
        }
        let mut path = Vec::new();
        let mut cur = from;
        while cur != to {
            let here = dist[cur];
            let tol = 1e-9 * here.max(1.0);
            let next = self.out_edges[cur].iter().copied().find(|&e| {
                let edge = &self.edges[e];
                let rest = dist[edge.to];
                rest < here && (edge.length + rest - here).abs() <= tol
            })?;
            path.push(next);
            cur = self.edges[next].to;
        }
        Some(path)
    }

    fn distances_to(&self, target: usize) -> Vec<f64> {
        let mut dist = vec![f64::INFINITY; self.nodes.len()];
        let mut heap = BinaryHeap::new();
        dist[target] = 0.0;
        heap.push(HeapItem(0.0, target));
        while let Some(HeapItem(d, v)) = heap.pop() {
            if d > dist[v] {
                continue;
            }
            for &e in &self.in_edges[v] {
                let edge = &self.edges[e];
                let nd = d + edge.length;
                if nd < dist[edge.from] {
                    dist[edge.from] = nd;
                    heap.push(HeapItem(nd, edge.from));
                }
            }
        }
        dist
    }

    pub fn path_length(&self, path: &[usize]) -> f64 {
        path.iter().map(|&e| self.edges[e].length).sum()
    }

    /// Write the network as `nodes.csv` / `edges.csv` style files. Every
    /// directed edge is written as its own one-way row.
    pub fn write_csv(&self, nodes_path: &Path, edges_path: &Path) -> Result<()> {
        let mut w = create(nodes_path)?;
        let io = |e| Error::io(nodes_path, e);
        writeln!(w, "node_id,x,y").map_err(io)?;
        for n in &self.nodes {
            writeln!(w, "{},{},{}", n.id, n.x, n.y).map_err(io)?;
        }
        w.flush().map_err(io)?;

        let mut w = create(edges_path)?;
        let io = |e| Error::io(edges_path, e);
        writeln!(w, "edge_id,from,to,length,oneway").map_err(io)?;
        for e in &self.edges {
            writeln!(
                w,
                "{},{},{},{},1",
                e.id, self.nodes[e.from].id, self.nodes[e.to].id, e.length
            )
            .map_err(io)?;
        }
        w.flush().map_err(io)
    }
}

pub(crate) fn create(path: &Path) -> Result<std::io::BufWriter<std::fs::File>> {
    std::fs::File::create(path)
        .map(std::io::BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

#[derive(PartialEq)]
struct HeapItem(f64, usize);

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .total_cmp(&self.0)
            .then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Deserialize)]
struct NodeRow {
    node_id: String,
    x: f64,
    y: f64,
}

#[derive(Debug, Deserialize)]
struct EdgeRow {
    edge_id: String,
    from: String,
    to: String,
    length: f64,
    oneway: u8,
}

pub(crate) fn csv_reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file))
}

pub(crate) fn malformed(path: &Path, err: csv::Error) -> Error {
    let line = err.position().map(|p| p.line()).unwrap_or(0);
    let message = match err.kind() {
        csv::ErrorKind::Deserialize { err, .. } => err.to_string(),
        _ => err.to_string(),
    };
    Error::Malformed {
        path: path.to_path_buf(),
        line,
        message,
    }
}

/// Read a headed CSV file, checking the header exactly and handing each
/// deserialized row to `f` with its 1-based line number.
pub(crate) fn read_rows<T, F>(path: &Path, expected: &[&str], mut f: F) -> Result<()>
where
    T: serde::de::DeserializeOwned,
    F: FnMut(u64, T) -> Result<()>,
{
    let mut reader = csv_reader(path)?;
    let headers = reader.headers().map_err(|e| malformed(path, e))?.clone();
    if headers.iter().ne(expected.iter().copied()) {
        return Err(Error::Malformed {
            path: path.to_path_buf(),
            line: 1,
            message: format!("expected header `{}`", expected.join(",")),
        });
    }
    for record in reader.records() {
        let record = record.map_err(|e| malformed(path, e))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let row: T = record
            .deserialize(Some(&headers))
            .map_err(|e| malformed(path, e))?;
        f(line, row)?;
    }
    Ok(())
}

/// Load a network from a nodes CSV (`node_id,x,y`) and an edges CSV
/// (`edge_id,from,to,length,oneway`).
///
/// Two-way roads (`oneway = 0`) become two directed edges `<id>_f` (from→to)
/// and `<id>_r` (to→from).
pub fn load_network(nodes_path: &Path, edges_path: &Path) -> Result<RoadNetwork> {
    let mut nodes = Vec::new();
    read_rows(nodes_path, &["node_id", "x", "y"], |_, row: NodeRow| {
        nodes.push(Node {
            id: row.node_id,
            x: row.x,
            y: row.y,
        });
        Ok(())
    })?;

    let mut edges = Vec::new();
    read_rows(
        edges_path,
        &["edge_id", "from", "to", "length", "oneway"],
        |line, row: EdgeRow| {
            match row.oneway {
                1 => edges.push(EdgeSpec {
                    id: row.edge_id,
                    from: row.from,
                    to: row.to,
                    length: row.length,
                }),
                0 => {
                    edges.push(EdgeSpec {
                        id: format!("{}_f", row.edge_id),
                        from: row.from.clone(),
                        to: row.to.clone(),
                        length: row.length,
                    });
                    edges.push(EdgeSpec {
                        id: format!("{}_r", row.edge_id),
                        from: row.to,
                        to: row.from,
                        length: row.length,
                    });
                }
                other => {
                    return Err(Error::Malformed {
                        path: edges_path.to_path_buf(),
                        line,
                        message: format!("oneway must be 0 or 1, got {other}"),
                    })
                }
            }
            Ok(())
        },
    )?;

    RoadNetwork::new(nodes, edges)
}

/// Square grid of two-way streets, `rows × cols` intersections spaced
/// `spacing` meters apart. Node ids are `n<row>_<col>`, horizontal roads
/// `h<row>_<col>` and vertical roads `v<row>_<col>`, each expanded into
/// `_f`/`_r` directed edges.
pub fn grid_network(rows: usize, cols: usize, spacing: f64) -> Result<RoadNetwork> {
    if rows == 0 || cols == 0 {
        return Err(Error::invalid("grid needs at least one row and column"));
    }
    let name = |r: usize, c: usize| format!("n{r:03}_{c:03}");
    let mut nodes = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            nodes.push(Node {
                id: name(r, c),
                x: c as f64 * spacing,
                y: r as f64 * spacing,
            });
        }
    }
    let mut edges = Vec::new();
    let mut two_way = |id: String, a: String, b: String| {
        edges.push(EdgeSpec {
            id: format!("{id}_f"),
            from: a.clone(),
            to: b.clone(),
            length: spacing,
        });
        edges.push(EdgeSpec {
            id: format!("{id}_r"),
            from: b,
            to: a,
            length: spacing,
        });
    };
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                two_way(format!("h{r:03}_{c:03}"), name(r, c), name(r, c + 1));
            }
            if r + 1 < rows {
                two_way(format!("v{r:03}_{c:03}"), name(r, c), name(r + 1, c));
            }
        }
    }
    RoadNetwork::new(nodes, edges)
}
