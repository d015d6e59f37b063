//! Degree-preserving randomisation and the significance test built on it.

use std::collections::HashSet;

use rand::Rng;

use super::{greedy_merge, modularity};
use crate::error::{Error, Result};
use crate::partition::Partition;
use crate::similarity::SimilarityGraph;

/// Rewire `g` with `10·|E|` attempted double-edge swaps. Each accepted swap
/// turns `(a,b,w1), (c,d,w2)` into `(a,d,w1), (c,b,w2)`: every node keeps its
/// number of incident edges and the multiset of weights is unchanged. Swaps
/// that would create a self-loop or a parallel edge are rejected.
pub fn randomize<R: Rng>(g: &SimilarityGraph, rng: &mut R) -> SimilarityGraph {
    let mut edges: Vec<(usize, usize, f64)> = g.edges().collect();
    let m = edges.len();
    if m >= 2 {
        let mut present: HashSet<(usize, usize)> = edges.iter().map(|&(i, j, _)| (i, j)).collect();
        let key = |a: usize, b: usize| if a < b { (a, b) } else { (b, a) };
        for _ in 0..10 * m {
            let x = rng.gen_range(0..m);
            let y = rng.gen_range(0..m);
            if x == y {
                continue;
            }
            let (a, b, w1) = edges[x];
            let (mut c, mut d, w2) = edges[y];
            if rng.gen::<bool>() {
                std::mem::swap(&mut c, &mut d);
            }
            if a == d || c == b {
                continue;
            }
            let (k1, k2) = (key(a, d), key(c, b));
            if k1 == k2 || present.contains(&k1) || present.contains(&k2) {
                continue;
            }
            present.remove(&key(a, b));
            present.remove(&key(c, d));
            present.insert(k1);
            present.insert(k2);
            edges[x] = (k1.0, k1.1, w1);
            edges[y] = (k2.0, k2.1, w2);
        }
    }
    SimilarityGraph::from_edges(g.node_ids().to_vec(), edges).expect("swaps keep the graph simple")
}

#[derive(Debug, Clone, PartialEq)]
pub struct NullTest {
    pub observed: f64,
    pub null_q: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation of the null modularities.
    pub std_dev: f64,
    pub accepted: bool,
}

/// Compare the modularity of `p` with greedy modularity on `replicates`
/// randomised copies of `g`. Accepted when the observed value exceeds the
/// null mean by more than `z` standard deviations (or simply exceeds the mean
/// when the null spread is zero).
pub fn null_test(g: &SimilarityGraph, p: &Partition, replicates: usize, z: f64, seed: u64) -> Result<NullTest> {
    if replicates < 2 {
        return Err(Error::invalid(format!(
            "null-model validation needs at least 2 replicates, got {replicates}"
        )));
    }
    if p.k() < 2 {
        return Err(Error::invalid("null-model validation needs at least 2 communities"));
    }
    let observed = modularity(g, p)?;
    let replicate = |r: usize| {
        let mut rng = crate::seed::rng(seed, &format!("null/{r}"));
        greedy_merge(&randomize(g, &mut rng)).modularity
    };
    #[cfg(feature = "parallel")]
    let null_q: Vec<f64> = {
        use rayon::prelude::*;
        (0..replicates).into_par_iter().map(replicate).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let null_q: Vec<f64> = (0..replicates).map(replicate).collect();

    let n = null_q.len() as f64;
    let mean = null_q.iter().sum::<f64>() / n;
    let var = null_q.iter().map(|q| (q - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let std_dev = var.sqrt();
    let accepted = if std_dev == 0.0 {
        observed > mean
    } else {
        observed > mean + z * std_dev
    };
    Ok(NullTest {
        observed,
        null_q,
        mean,
        std_dev,
        accepted,
    })
}

pub fn validate_partition(g: &SimilarityGraph, p: &Partition, replicates: usize, z: f64, seed: u64) -> Result<bool> {
    Ok(null_test(g, p, replicates, z, seed)?.accepted)
}
