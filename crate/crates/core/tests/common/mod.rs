//! Brute-force reference implementations used as test oracles. Nothing here
//! calls into the code paths it checks beyond reading plain data.
#![allow(dead_code)]

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use trajclust::network::{EdgeSpec, Node, RoadNetwork};
use trajclust::trajectory::{Trajectory, TrajectorySet};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random chain network with `edges` segments of random length, plus a
/// random dataset of `n` trajectories drawing (with repeats) from a small
/// pool of segments so that sharing is common.
pub fn random_dataset(rng: &mut ChaCha8Rng, n: usize, edges: usize) -> TrajectorySet {
    let nodes = (0..=edges)
        .map(|i| Node {
            id: format!("n{i}"),
            x: rng.gen_range(0.0..1000.0),
            y: rng.gen_range(0.0..1000.0),
        })
        .collect();
    let specs = (0..edges)
        .map(|i| EdgeSpec {
            id: format!("e{i:03}"),
            from: format!("n{i}"),
            to: format!("n{}", i + 1),
            length: rng.gen_range(1.0..500.0),
        })
        .collect();
    let net = Arc::new(RoadNetwork::new(nodes, specs).unwrap());
    let trajectories = (0..n)
        .map(|t| {
            let len = rng.gen_range(1..=8);
            let seq: Vec<usize> = (0..len).map(|_| rng.gen_range(0..edges)).collect();
            Trajectory::from_edges(format!("t{t:04}"), &seq, &net, 10.0)
        })
        .collect();
    TrajectorySet::new(net, trajectories, false).unwrap()
}

/// Dense spatial / classic TF-IDF weights straight from the definition.
pub fn dense_weights(ts: &TrajectorySet, classic: bool) -> Vec<Vec<f64>> {
    let net = ts.network();
    let m = net.edges().len();
    let n = ts.len() as f64;
    let mut df = vec![0usize; m];
    for t in ts.trajectories() {
        let set: HashSet<usize> = t.visits.iter().map(|v| v.edge).collect();
        for e in set {
            df[e] += 1;
        }
    }
    ts.trajectories()
        .iter()
        .map(|t| {
            let total_len: f64 = t.visits.iter().map(|v| net.edge(v.edge).length).sum();
            (0..m)
                .map(|e| {
                    let count = t.visits.iter().filter(|v| v.edge == e).count();
                    if count == 0 {
                        return 0.0;
                    }
                    let tf = if classic {
                        count as f64 / t.visits.len() as f64
                    } else {
                        count as f64 * net.edge(e).length / total_len
                    };
                    tf * (n / df[e] as f64).ln()
                })
                .collect()
        })
        .collect()
}

pub fn dense_cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

pub fn set_jaccard(a: &Trajectory, b: &Trajectory) -> f64 {
    let sa: HashSet<usize> = a.visits.iter().map(|v| v.edge).collect();
    let sb: HashSet<usize> = b.visits.iter().map(|v| v.edge).collect();
    sa.intersection(&sb).count() as f64 / sa.union(&sb).count() as f64
}

/// All-pairs similarity graph: `(i, j, w)` for every `i < j` with `w > 0`.
pub fn brute_force_graph(ts: &TrajectorySet, scheme: &str) -> Vec<(usize, usize, f64)> {
    let n = ts.len();
    let weights = match scheme {
        "spatial" => Some(dense_weights(ts, false)),
        "classic" => Some(dense_weights(ts, true)),
        _ => None,
    };
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let s = match &weights {
                Some(w) => dense_cosine(&w[i], &w[j]),
                None => set_jaccard(ts.get(i), ts.get(j)),
            };
            if s > 0.0 {
                out.push((i, j, s));
            }
        }
    }
    out
}

/// Overlap ratio by plain set arithmetic.
pub fn naive_overlap(ts: &TrajectorySet, a: usize, b: usize) -> f64 {
    let net = ts.network();
    let sa: HashSet<usize> = ts.get(a).visits.iter().map(|v| v.edge).collect();
    let sb: HashSet<usize> = ts.get(b).visits.iter().map(|v| v.edge).collect();
    let num: f64 = sa.intersection(&sb).map(|&e| net.edge(e).length).sum();
    let den: f64 = sa.iter().map(|&e| net.edge(e).length).sum();
    num / den
}

pub fn naive_intraclass(ts: &TrajectorySet, labels: &[usize]) -> f64 {
    let clusters: HashSet<usize> = labels.iter().copied().collect();
    clusters
        .into_iter()
        .map(|c| {
            let members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
            let mut s = 0.0;
            for &i in &members {
                for &j in &members {
                    if i != j {
                        s += naive_overlap(ts, i, j);
                    }
                }
            }
            s / members.len() as f64
        })
        .sum()
}

pub fn naive_interclass(ts: &TrajectorySet, labels: &[usize]) -> f64 {
    let n = labels.len();
    let clusters: HashSet<usize> = labels.iter().copied().collect();
    clusters
        .into_iter()
        .map(|c| {
            let size = labels.iter().filter(|&&l| l == c).count();
            if size == n {
                return 0.0;
            }
            let mut s = 0.0;
            for i in (0..n).filter(|&i| labels[i] == c) {
                for j in (0..n).filter(|&j| labels[j] != c) {
                    s += naive_overlap(ts, i, j);
                }
            }
            s / (n - size) as f64
        })
        .sum()
}

/// Dense adjacency-matrix modularity: (1/2m) Σ_ij [A_ij − k_i k_j / 2m] δ.
pub fn dense_modularity(n: usize, edges: &[(usize, usize, f64)], labels: &[usize]) -> f64 {
    let mut a = vec![vec![0.0; n]; n];
    for &(i, j, w) in edges {
        a[i][j] += w;
        a[j][i] += w;
    }
    let k: Vec<f64> = a.iter().map(|r| r.iter().sum()).collect();
    let m2: f64 = k.iter().sum();
    if m2 == 0.0 {
        return 0.0;
    }
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            if labels[i] == labels[j] {
                q += a[i][j] - k[i] * k[j] / m2;
            }
        }
    }
    q / m2
}

/// Every set partition of `0..n` as a restricted growth string.
pub fn all_partitions(n: usize) -> Vec<Vec<usize>> {
    fn rec(i: usize, n: usize, cur: &mut Vec<usize>, max: usize, out: &mut Vec<Vec<usize>>) {
        if i == n {
            out.push(cur.clone());
            return;
        }
        for c in 0..=max + 1 {
            cur.push(c);
            rec(i + 1, n, cur, max.max(c), out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        return vec![vec![]];
    }
    let mut cur = vec![0];
    rec(1, n, &mut cur, 0, &mut out);
    out
}

pub fn exhaustive_max_modularity(n: usize, edges: &[(usize, usize, f64)]) -> (f64, Vec<usize>) {
    all_partitions(n)
        .into_iter()
        .map(|p| (dense_modularity(n, edges, &p), p))
        .fold((f64::NEG_INFINITY, vec![]), |best, cand| if cand.0 > best.0 { cand } else { best })
}

pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Vec<(usize, usize, f64)> {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(p) {
                edges.push((i, j, rng.gen_range(0.05..1.0)));
            }
        }
    }
    edges
}

/// Naive O(n³) agglomeration recomputing every linkage from the original
/// matrix. Returns `(min member of left, min member of right, distance)` per
/// step with left < right.
pub fn naive_hac(d: &[Vec<f64>], linkage: &str) -> Vec<(usize, usize, f64)> {
    let n = d.len();
    let mut clusters: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut out = Vec::new();
    while clusters.len() > 1 {
        clusters.sort_by_key(|c| *c.iter().min().unwrap());
        let mut best = (f64::INFINITY, 0, 0);
        for a in 0..clusters.len() {
            for b in a + 1..clusters.len() {
                let pairs = clusters[a]
                    .iter()
                    .flat_map(|&i| clusters[b].iter().map(move |&j| (i, j)));
                let ds: Vec<f64> = pairs.map(|(i, j)| d[i][j]).collect();
                let v = match linkage {
                    "single" => ds.iter().cloned().fold(f64::INFINITY, f64::min),
                    "complete" => ds.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
                    _ => ds.iter().sum::<f64>() / ds.len() as f64,
                };
                if v < best.0 {
                    best = (v, a, b);
                }
            }
        }
        let (v, a, b) = best;
        let ma = *clusters[a].iter().min().unwrap();
        let mb = *clusters[b].iter().min().unwrap();
        out.push((ma.min(mb), ma.max(mb), v));
        let moved = clusters.remove(b);
        clusters[a].extend(moved);
    }
    out
}

pub fn random_distance_matrix(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<f64>> {
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v = rng.gen_range(0.0..1.0);
            d[i][j] = v;
            d[j][i] = v;
        }
    }
    d
}

/// Components left after removing the `k − 1` heaviest edges of a minimum
/// spanning tree (Kruskal).
pub fn mst_components(d: &[Vec<f64>], k: usize) -> Vec<usize> {
    let n = d.len();
    let mut edges: Vec<(f64, usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .map(|(i, j)| (d[i][j], i, j))
        .collect();
    edges.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut uf: Vec<usize> = (0..n).collect();
    fn find(uf: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while uf[r] != r {
            r = uf[r];
        }
        uf[x] = r;
        r
    }
    let mut tree = Vec::new();
    for (w, i, j) in edges {
        let (a, b) = (find(&mut uf, i), find(&mut uf, j));
        if a != b {
            uf[a] = b;
            tree.push((w, i, j));
        }
    }
    tree.sort_by(|a, b| a.0.total_cmp(&b.0));
    tree.truncate(n - k);
    let mut uf: Vec<usize> = (0..n).collect();
    for (_, i, j) in tree {
        let (a, b) = (find(&mut uf, i), find(&mut uf, j));
        uf[a] = b;
    }
    (0..n).map(|i| find(&mut uf, i)).collect()
}

/// ARI from pair counting over all element pairs.
pub fn pair_count_ari(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len();
    let (mut ss, mut sd, mut ds, mut dd) = (0f64, 0f64, 0f64, 0f64);
    for i in 0..n {
        for j in i + 1..n {
            match (a[i] == a[j], b[i] == b[j]) {
                (true, true) => ss += 1.0,
                (true, false) => sd += 1.0,
                (false, true) => ds += 1.0,
                (false, false) => dd += 1.0,
            }
        }
    }
    let num = 2.0 * (ss * dd - sd * ds);
    let den = (ss + sd) * (sd + dd) + (ss + ds) * (ds + dd);
    if den == 0.0 {
        1.0
    } else {
        num / den
    }
}

/// Every simple directed path from `s` to `t`, as edge index lists.
pub fn enumerate_paths(net: &RoadNetwork, s: usize, t: usize) -> Vec<Vec<usize>> {
    fn dfs(net: &RoadNetwork, v: usize, t: usize, seen: &mut Vec<bool>, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if v == t {
            out.push(cur.clone());
            return;
        }
        for (idx, e) in net.edges().iter().enumerate() {
            if e.from == v && !seen[e.to] {
                seen[e.to] = true;
                cur.push(idx);
                dfs(net, e.to, t, seen, cur, out);
                cur.pop();
                seen[e.to] = false;
            }
        }
    }
    let mut seen = vec![false; net.nodes().len()];
    seen[s] = true;
    let mut out = Vec::new();
    dfs(net, s, t, &mut seen, &mut Vec::new(), &mut out);
    out
}

pub fn labels_from(values: &[usize]) -> HashMap<usize, Vec<usize>> {
    let mut m: HashMap<usize, Vec<usize>> = HashMap::new();
    for (i, &v) in values.iter().enumerate() {
        m.entry(v).or_default().push(i);
    }
    m
}
