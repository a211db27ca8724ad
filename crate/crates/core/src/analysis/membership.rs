use serde::Serialize;

use super::{Cube, SpreadSubgraph};
use crate::dynamics::{EpochEdges, Snapshot};
use crate::error::{invalid, Result};
use crate::graph::{for_each_edge, UnionFind};

/// Marks the vertices sharing a component with any of `seeds` in the graph
/// induced on the vertices inside `cube`.
pub fn component_of(snap: &Snapshot, edges: &EpochEdges<'_>, cube: &Cube, seeds: &[u32]) -> Result<Vec<bool>> {
    let n = snap.len();
    let inside: Vec<bool> = (0..n).map(|i| cube.cell_of(snap.pos(i), cube.side, 1).is_some()).collect();
    let mut uf = UnionFind::new(n);
    for_each_edge(snap, edges, None, |i, j| {
        if inside[i] && inside[j] {
            uf.union(i, j);
        }
    })?;
    let mut hit = vec![false; n];
    for &s in seeds {
        if (s as usize) < n && inside[s as usize] {
            let r = uf.find(s as usize);
            hit[r] = true;
        }
    }
    Ok((0..n).map(|i| inside[i] && hit[uf.find(i)]).collect())
}

fn check_spread(sg: &SpreadSubgraph) -> Result<()> {
    if !sg.success {
        return invalid("membership needs a successful spread subgraph");
    }
    Ok(())
}

/// Whether the probe (cloud index) shares a component inside the cube with
/// the spread subgraph.
pub fn membership_single(snap: &Snapshot, edges: &EpochEdges<'_>, sg: &SpreadSubgraph, probe: usize) -> Result<bool> {
    check_spread(sg)?;
    if probe >= snap.len() || sg.cube.cell_of(snap.pos(probe), sg.cube.side, 1).is_none() {
        return invalid("probe must be a vertex inside the cube");
    }
    Ok(component_of(snap, edges, &sg.cube, &sg.distinguished)?[probe])
}

/// Whether some vertex lies in the spread subgraph's component at the first
/// time and in the other's at the second. The times must fall in different
/// epochs.
pub fn membership_two_time(
    first: (&Snapshot, &EpochEdges<'_>, &SpreadSubgraph),
    second: (&Snapshot, &EpochEdges<'_>, &SpreadSubgraph),
) -> Result<bool> {
    let (s1, e1, g1) = first;
    let (s2, e2, g2) = second;
    check_spread(g1)?;
    check_spread(g2)?;
    if s1.epoch == s2.epoch {
        return invalid("the two times must lie in different epochs");
    }
    if s1.cloud != s2.cloud && *s1.cloud != *s2.cloud {
        return invalid("the two snapshots come from different clouds");
    }
    let a = component_of(s1, e1, &g1.cube, &g1.distinguished)?;
    let b = component_of(s2, e2, &g2.cube, &g2.distinguished)?;
    Ok(a.iter().zip(&b).any(|(x, y)| *x && *y))
}

/// A success frequency with its binomial standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub successes: u32,
    pub trials: u32,
    pub p_hat: f64,
    pub std_err: f64,
}

impl Estimate {
    pub fn new(successes: u32, trials: u32) -> Self {
        let p = if trials == 0 { f64::NAN } else { f64::from(successes) / f64::from(trials) };
        Estimate {
            successes,
            trials,
            p_hat: p,
            std_err: (p * (1.0 - p) / f64::from(trials)).sqrt(),
        }
    }
}
