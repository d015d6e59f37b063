//! GeoJSON export of clustered trajectories.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::partition::Partition;
use crate::trajectory::{Trajectory, TrajectorySet};

/// Node coordinate chain of a trajectory. A jump between non-adjacent edges
/// simply connects the two nodes with a straight segment.
pub fn coordinate_chain(t: &Trajectory, ts: &TrajectorySet) -> Vec<[f64; 2]> {
    let net = ts.network();
    let mut out = Vec::with_capacity(t.len() + 1);
    for e in t.edges() {
        let edge = net.edge(e);
        let (fx, fy) = net.coords(edge.from);
        if out.last() != Some(&[fx, fy]) {
            out.push([fx, fy]);
        }
        let (tx, ty) = net.coords(edge.to);
        out.push([tx, ty]);
    }
    out
}

fn point(xy: (f64, f64), traj: &str, cluster: usize, role: &str) -> Value {
    json!({
        "type": "Feature",
        "geometry": {"type": "Point", "coordinates": [xy.0, xy.1]},
        "properties": {"traj_id": traj, "cluster_id": cluster, "role": role},
    })
}

/// One `FeatureCollection` per cluster, in cluster id order. Each member
/// contributes its route as a `LineString` plus `departure` and `arrival`
/// points.
pub fn cluster_collections(ts: &TrajectorySet, p: &Partition) -> Result<Vec<Value>> {
    if p.len() != ts.len() {
        return Err(Error::PartitionMismatch {
            expected: ts.len(),
            found: p.len(),
        });
    }
    let net = ts.network();
    Ok(p.clusters()
        .into_iter()
        .enumerate()
        .map(|(c, members)| {
            let mut features = Vec::with_capacity(members.len() * 3);
            for &m in &members {
                let t = ts.get(m);
                features.push(json!({
                    "type": "Feature",
                    "geometry": {"type": "LineString", "coordinates": coordinate_chain(t, ts)},
                    "properties": {"traj_id": t.id, "cluster_id": c, "role": "route"},
                }));
                features.push(point(t.start_point(net), &t.id, c, "departure"));
                features.push(point(t.end_point(net), &t.id, c, "arrival"));
            }
            json!({
                "type": "FeatureCollection",
                "properties": {"cluster_id": c, "size": members.len()},
                "features": features,
            })
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::grid_network;
    use std::sync::Arc;

    #[test]
    fn collections_per_cluster() {
        let net = Arc::new(grid_network(2, 3, 10.0).unwrap());
        let e = |id: &str| net.edge_idx(id).unwrap();
        let t0 = Trajectory::from_edges("a", &[e("h000_000_f"), e("h000_001_f")], &net, 10.0);
        let t1 = Trajectory::from_edges("b", &[e("v000_000_f")], &net, 10.0);
        let ts = TrajectorySet::new(net.clone(), vec![t0, t1], true).unwrap();
        let cols = cluster_collections(&ts, &Partition::singletons(2)).unwrap();
        assert_eq!(cols.len(), 2);
        let f = &cols[0]["features"];
        assert_eq!(f[0]["geometry"]["coordinates"], json!([[0.0, 0.0], [10.0, 0.0], [20.0, 0.0]]));
        assert_eq!(f[1]["properties"]["role"], "departure");
        assert_eq!(f[2]["properties"]["role"], "arrival");
        assert_eq!(f[2]["geometry"]["coordinates"], json!([20.0, 0.0]));
    }
}
