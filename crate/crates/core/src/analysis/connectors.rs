use serde::Serialize;

use crate::dynamics::{EpochEdges, Snapshot};
use crate::error::{invalid, Result};

/// `u^-g (1 ∧ v^-(g delta) (r + u^-(g/d))^-(d delta))`, the lower-bound
/// shape for the mean number of common neighbours of mark at least 1/2.
pub fn connector_bracket(gamma: f64, delta: f64, dim: usize, u: f64, v: f64, r: f64) -> f64 {
    let d = dim as f64;
    let tail = v.powf(-gamma * delta) * (r + u.powf(-gamma / d)).powf(-d * delta);
    u.powf(-gamma) * tail.min(1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConnectorCount {
    pub count: u32,
    pub bracket: f64,
    pub distance: f64,
}

/// Number of vertices of mark at least 1/2 adjacent to both `i` and `j`
/// (cloud indices), with the bracket for marks `u_i`, `u_j` and their
/// distance.
pub fn two_connector_count(snap: &Snapshot, edges: &EpochEdges<'_>, i: usize, j: usize) -> Result<ConnectorCount> {
    let orc = edges.oracle;
    orc.check_snapshot(snap)?;
    if snap.epoch != edges.epoch {
        return invalid("snapshot lies in a different epoch");
    }
    let n = snap.len();
    if i >= n || j >= n || i == j {
        return invalid("need two distinct vertices of the snapshot");
    }
    let vs = &snap.cloud.vertices;
    let (u, v) = (vs[i].mark, vs[j].mark);
    if u >= 0.5 || v >= 0.5 {
        return invalid(format!("both marks must be below 1/2, got {u} and {v}"));
    }
    let count = (0..n)
        .filter(|&z| z != i && z != j && vs[z].mark >= 0.5)
        .filter(|&z| edges.has_edge(snap, z, i) && edges.has_edge(snap, z, j))
        .count() as u32;
    let kp = &orc.kernel;
    let distance = snap.dist(i, j);
    Ok(ConnectorCount {
        count,
        bracket: connector_bracket(kp.gamma, kp.delta, kp.dim, u, v, distance),
        distance,
    })
}
