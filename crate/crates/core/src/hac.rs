//! Agglomerative clustering baselines on `1 − similarity`.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::Partition;
use crate::similarity::{SimilarityModel, SimilarityScheme};
use crate::trajectory::TrajectorySet;

pub const DEFAULT_MAX_N: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Linkage {
    Single,
    Average,
    Complete,
}

impl Linkage {
    pub fn name(self) -> &'static str {
        match self {
            Linkage::Single => "single",
            Linkage::Average => "average",
            Linkage::Complete => "complete",
        }
    }
}

impl std::str::FromStr for Linkage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single" => Ok(Linkage::Single),
            "average" => Ok(Linkage::Average),
            "complete" | "full" => Ok(Linkage::Complete),
            other => Err(Error::invalid(format!("unknown linkage `{other}`"))),
        }
    }
}

/// Symmetric matrix with zero diagonal, stored as the condensed upper
/// triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct CondensedMatrix {
    n: usize,
    data: Vec<f64>,
}

impl CondensedMatrix {
    pub fn filled(n: usize, value: f64) -> Self {
        CondensedMatrix {
            n,
            data: vec![value; n * n.saturating_sub(1) / 2],
        }
    }

    /// Build from a full row-major matrix; only the upper triangle is read.
    pub fn from_square(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let mut m = CondensedMatrix::filled(n, 0.0);
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate().skip(i + 1) {
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    fn offset(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        i * (2 * self.n - i - 1) / 2 + (j - i - 1)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            0.0
        } else {
            self.data[self.offset(i, j)]
        }
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert_ne!(i, j, "diagonal is fixed at zero");
        let o = self.offset(i, j);
        self.data[o] = v;
    }
}

/// Pairwise distances `1 − similarity`; pairs without a shared segment are
/// at distance 1.
pub fn distance_matrix(ts: &TrajectorySet, scheme: SimilarityScheme, max_n: usize) -> Result<CondensedMatrix> {
    let model = SimilarityModel::new(ts, scheme)?;
    distance_matrix_from_model(&model, max_n)
}

pub fn distance_matrix_from_model(model: &SimilarityModel, max_n: usize) -> Result<CondensedMatrix> {
    let n = model.len();
    if n > max_n {
        return Err(Error::TooLarge { n, cap: max_n });
    }
    let mut d = CondensedMatrix::filled(n, 1.0);
    for (i, j, w) in model.graph(0.0).edges() {
        d.set(i, j, 1.0 - w);
    }
    Ok(d)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    /// Cluster labels: leaves are `0..n`, the cluster formed at step `s` is
    /// `n + s`. `left < right`.
    pub left: usize,
    pub right: usize,
    pub distance: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram {
    n: usize,
    merges: Vec<Merge>,
}

impl Dendrogram {
    pub fn leaves(&self) -> usize {
        self.n
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    /// Undo the last `k − 1` merges. Clusters are numbered by smallest
    /// member.
    pub fn cut(&self, k: usize) -> Result<Partition> {
        if k == 0 || k > self.n {
            return Err(Error::invalid(format!("cut size {k} outside 1..={}", self.n)));
        }
        let mut parent: Vec<usize> = (0..self.n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        // Representative leaf of each merged label.
        let mut rep: Vec<usize> = (0..self.n).collect();
        for m in &self.merges[..self.n - k] {
            let a = find(&mut parent, rep[m.left]);
            let b = find(&mut parent, rep[m.right]);
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            parent[hi] = lo;
            rep.push(lo);
        }
        let roots: Vec<usize> = (0..self.n).map(|i| find(&mut parent, i)).collect();
        Ok(Partition::from_labels(&roots))
    }

    /// CSV `step,left,right,distance`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = crate::network::create(path)?;
        let io = |e| Error::io(path, e);
        writeln!(w, "step,left,right,distance").map_err(io)?;
        for (s, m) in self.merges.iter().enumerate() {
            writeln!(w, "{s},{},{},{}", m.left, m.right, m.distance).map_err(io)?;
        }
        w.flush().map_err(io)
    }
}

/// Standard agglomerative clustering with Lance–Williams updates. At each
/// step the closest pair of clusters merges; equal distances go to the pair
/// with the smallest (min-member, min-member) indices. Average linkage is the
/// unweighted pair-group mean.
pub fn agglomerate(d: &CondensedMatrix, linkage: Linkage) -> Result<Dendrogram> {
    let n = d.len();
    if n < 2 {
        return Err(Error::invalid("agglomerative clustering needs at least 2 points"));
    }
    let mut dist = d.clone();
    let mut active = vec![true; n];
    let mut size = vec![1usize; n];
    let mut label: Vec<usize> = (0..n).collect();
    // Nearest higher-indexed active neighbour of every slot.
    let mut nn = vec![usize::MAX; n];
    let mut nn_d = vec![f64::INFINITY; n];

    let rescan = |dist: &CondensedMatrix, active: &[bool], i: usize| -> (usize, f64) {
        let mut best = (usize::MAX, f64::INFINITY);
        for (j, _) in active.iter().enumerate().skip(i + 1).filter(|(_, &a)| a) {
            let v = dist.get(i, j);
            if v < best.1 {
                best = (j, v);
            }
        }
        best
    };
    for i in 0..n {
        (nn[i], nn_d[i]) = rescan(&dist, &active, i);
    }

    let mut merges = Vec::with_capacity(n - 1);
    for step in 0..n - 1 {
        let mut i = usize::MAX;
        for k in 0..n {
            if active[k] && nn[k] != usize::MAX && (i == usize::MAX || nn_d[k] < nn_d[i]) {
                i = k;
            }
        }
        let j = nn[i];
        let dij = nn_d[i];
        let (la, lb) = (label[i], label[j]);
        merges.push(Merge {
            left: la.min(lb),
            right: la.max(lb),
            distance: dij,
            size: size[i] + size[j],
        });

        active[j] = false;
        for (k, &alive) in active.iter().enumerate() {
            if !alive || k == i {
                continue;
            }
            let (dik, djk) = (dist.get(i, k), dist.get(j, k));
            let v = match linkage {
                Linkage::Single => dik.min(djk),
                Linkage::Complete => dik.max(djk),
                Linkage::Average => {
                    (size[i] as f64 * dik + size[j] as f64 * djk) / (size[i] + size[j]) as f64
                }
            };
            dist.set(i, k, v);
        }
        size[i] += size[j];
        label[i] = n + step;

        for k in 0..n {
            if !active[k] {
                continue;
            }
            if k == i || nn[k] == i || nn[k] == j {
                (nn[k], nn_d[k]) = rescan(&dist, &active, k);
            } else if k < i {
                let v = dist.get(k, i);
                if v < nn_d[k] || (v == nn_d[k] && i < nn[k]) {
                    nn[k] = i;
                    nn_d[k] = v;
                }
            }
        }
    }

    Ok(Dendrogram { n, merges })
}

/// Convenience: matrix, linkage and cut in one call.
pub fn hac_partition(ts: &TrajectorySet, scheme: SimilarityScheme, linkage: Linkage, k: usize) -> Result<Partition> {
    let d = distance_matrix(ts, scheme, DEFAULT_MAX_N)?;
    agglomerate(&d, linkage)?.cut(k)
}
