//! Broadcast on the torus and the percolation-time proxy in a box.

use serde::Serialize;

use crate::dynamics::{evolve, validate_grid, EdgeOracle, EpochEdges, Snapshot};
use crate::error::{invalid, Result};
use crate::graph::{components_fast_with, ComponentLabels};

/// Component labels for a sequence of snapshots, reusing the flags of each
/// epoch.
pub(crate) struct Labeller<'a> {
    orc: &'a EdgeOracle,
    edges: Option<EpochEdges<'a>>,
}

impl<'a> Labeller<'a> {
    pub(crate) fn new(orc: &'a EdgeOracle) -> Self {
        Labeller { orc, edges: None }
    }

    pub(crate) fn labels(&mut self, snap: &Snapshot) -> Result<ComponentLabels> {
        if self.edges.as_ref().map(|e| e.epoch) != Some(snap.epoch) {
            self.edges = Some(self.orc.epoch_edges(snap.epoch));
        }
        let edges = self.edges.as_ref().expect("edges set above");
        Ok(components_fast_with(snap, edges, None)?.labels)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BroadcastTrace {
    pub times: Vec<f64>,
    pub informed: Vec<u32>,
    pub n: u32,
    /// First grid time at which every vertex is informed.
    pub t_bc: Option<f64>,
}

/// Floods a message from the origin: at every grid time the informed set
/// absorbs every component it meets. Stops at the first time everyone is
/// informed.
pub fn run_broadcast(orc: &EdgeOracle, t_grid: &[f64]) -> Result<BroadcastTrace> {
    let cloud = &orc.cloud;
    if !cloud.domain.is_torus() {
        return invalid("broadcast is defined on the torus");
    }
    let origin = match cloud.origin_index() {
        Some(o) => o,
        None => return invalid("broadcast needs a cloud with an origin vertex"),
    };
    validate_grid(t_grid)?;
    let n = cloud.len();
    let mut informed = vec![false; n];
    informed[origin] = true;
    let mut count = 1u32;
    let mut trace = BroadcastTrace {
        times: Vec::new(),
        informed: Vec::new(),
        n: n as u32,
        t_bc: None,
    };
    let mut labeller = Labeller::new(orc);
    let mut hit = vec![false; n];
    for snap in evolve(cloud.clone(), t_grid, orc.seed())? {
        if (count as usize) < n {
            let labels = labeller.labels(&snap)?;
            hit.iter_mut().for_each(|h| *h = false);
            for i in 0..n {
                if informed[i] {
                    hit[labels.root[i] as usize] = true;
                }
            }
            for i in 0..n {
                if !informed[i] && hit[labels.root[i] as usize] {
                    informed[i] = true;
                    count += 1;
                }
            }
        }
        trace.times.push(snap.time);
        trace.informed.push(count);
        if count as usize == n {
            trace.t_bc = Some(snap.time);
            break;
        }
    }
    Ok(trace)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PercTrace {
    pub times: Vec<f64>,
    pub origin_component: Vec<u32>,
    pub giant: Vec<u32>,
    pub n: u32,
    /// First grid time at which the origin lies in a largest component of
    /// size at least `rho * n`.
    pub t_perc: Option<f64>,
}

pub const DEFAULT_GIANT_FRACTION: f64 = 0.25;

/// Percolation-time proxy in a box. Stops at the first success.
pub fn run_percolation_proxy(orc: &EdgeOracle, t_grid: &[f64], rho: f64) -> Result<PercTrace> {
    let cloud = &orc.cloud;
    if cloud.domain.is_torus() {
        return invalid("the percolation proxy is defined in box mode");
    }
    if !(rho > 0.0 && rho < 1.0) {
        return invalid(format!("giant fraction must lie in (0,1), got {rho}"));
    }
    let origin = match cloud.origin_index() {
        Some(o) => o,
        None => return invalid("percolation needs a cloud with an origin vertex"),
    };
    validate_grid(t_grid)?;
    let n = cloud.len();
    let mut trace = PercTrace {
        times: Vec::new(),
        origin_component: Vec::new(),
        giant: Vec::new(),
        n: n as u32,
        t_perc: None,
    };
    let mut labeller = Labeller::new(orc);
    for snap in evolve(cloud.clone(), t_grid, orc.seed())? {
        let labels = labeller.labels(&snap)?;
        let own = labels.component_size(origin);
        let giant = labels.largest_size();
        trace.times.push(snap.time);
        trace.origin_component.push(own);
        trace.giant.push(giant);
        if own == giant && f64::from(own) >= rho * n as f64 {
            trace.t_perc = Some(snap.time);
            break;
        }
    }
    Ok(trace)
}

/// `P(T > t)` at each `t`, counting `None` as never.
pub fn survival_curve(samples: &[Option<f64>], t_grid: &[f64]) -> Vec<f64> {
    if samples.is_empty() {
        return vec![f64::NAN; t_grid.len()];
    }
    t_grid
        .iter()
        .map(|&t| {
            let alive = samples.iter().filter(|s| s.is_none_or(|v| v > t)).count();
            alive as f64 / samples.len() as f64
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{uniform_grid, TailRadius};
    use crate::geometry::Domain;
    use crate::kernels::{KernelParams, Variant};
    use crate::pointprocess::{sample_ppp, PointCloud, Vertex};
    use std::sync::Arc;

    fn oracle(cloud: PointCloud, alpha: f64, seed: u64) -> EdgeOracle {
        let kp = KernelParams::new(Variant::Generic, 0.8, 1.5, cloud.domain.dim).with_alpha(alpha);
        EdgeOracle::new(seed, kp, Arc::new(cloud), TailRadius::Auto).unwrap()
    }

    #[test]
    fn lone_vertex_is_informed_at_once() {
        let dom = Domain::torus(1, 10.0).unwrap();
        let c = PointCloud::from_vertices(dom, 1.0, true, vec![Vertex { id: 0, pos: vec![0.0].into(), mark: 0.5 }]).unwrap();
        let t = run_broadcast(&oracle(c, 0.5, 1), &[0.0, 1.0]).unwrap();
        assert_eq!(t.t_bc, Some(0.0));
        assert_eq!(t.informed, vec![1]);
    }

    #[test]
    fn dense_graph_broadcasts_at_zero() {
        let dom = Domain::torus(1, 20.0).unwrap();
        let c = sample_ppp(&dom, 1.0, true, 2).unwrap();
        let t = run_broadcast(&oracle(c, 1.0, 1), &uniform_grid(1.0, 5.0).unwrap()).unwrap();
        assert_eq!(t.t_bc, Some(0.0));
    }

    #[test]
    fn broadcast_needs_palm_torus() {
        let dom = Domain::torus(1, 20.0).unwrap();
        let c = sample_ppp(&dom, 1.0, false, 2).unwrap();
        assert!(run_broadcast(&oracle(c, 1.0, 1), &[0.0]).is_err());
        let b = Domain::cube(1, 20.0).unwrap();
        let c = sample_ppp(&b, 1.0, true, 2).unwrap();
        assert!(run_broadcast(&oracle(c, 1.0, 1), &[0.0]).is_err());
    }

    #[test]
    fn informed_counts_are_monotone_and_refinement_helps() {
        let dom = Domain::torus(1, 400.0).unwrap();
        for seed in 0..5 {
            let c = sample_ppp(&dom, 1.0, true, seed).unwrap();
            let orc = oracle(c, 0.05, seed);
            let mut last = None;
            for dt in [1.0, 0.5, 0.25] {
                let t = run_broadcast(&orc, &uniform_grid(dt, 200.0).unwrap()).unwrap();
                assert!(t.informed.windows(2).all(|w| w[0] <= w[1]));
                if let (Some(prev), Some(now)) = (last, t.t_bc) {
                    assert!(now <= prev, "{now} > {prev}");
                }
                if last.is_some() {
                    assert!(t.t_bc.is_some());
                }
                last = t.t_bc;
            }
        }
    }

    #[test]
    fn percolation_proxy_edge_cases() {
        let dom = Domain::cube(1, 50.0).unwrap();
        let c = sample_ppp(&dom, 1.0, true, 3).unwrap();
        let dense = run_percolation_proxy(&oracle(c.clone(), 1.0, 1), &[0.0, 1.0], 0.25).unwrap();
        assert_eq!(dense.t_perc, Some(0.0));
        let none = run_percolation_proxy(&oracle(c.clone(), 1e-12, 1), &[0.0, 1.0, 2.0], 0.25).unwrap();
        assert_eq!(none.t_perc, None);
        assert_eq!(none.times.len(), 3);
        assert!(run_percolation_proxy(&oracle(c, 1.0, 1), &[0.0], 1.5).is_err());
        let t = Domain::torus(1, 50.0).unwrap();
        let c = sample_ppp(&t, 1.0, true, 3).unwrap();
        assert!(run_percolation_proxy(&oracle(c, 1.0, 1), &[0.0], 0.25).is_err());
    }

    #[allow(clippy::needless_range_loop)]
    fn brute_force_t_bc(orc: &EdgeOracle, grid: &[f64]) -> Option<f64> {
        let n = orc.len();
        let origin = orc.cloud.origin_index().unwrap();
        let mut informed = vec![false; n];
        informed[origin] = true;
        for snap in evolve(orc.cloud.clone(), grid, orc.seed()).unwrap() {
            let mut adj = vec![vec![false; n]; n];
            for i in 0..n {
                for j in 0..n {
                    adj[i][j] = i != j && orc.has_edge(&snap, i, j).unwrap();
                }
            }
            // transitive closure, then absorb every component touching the set
            for k in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        adj[i][j] = adj[i][j] || (adj[i][k] && adj[k][j]);
                    }
                }
            }
            let before = informed.clone();
            for j in 0..n {
                if (0..n).any(|i| before[i] && adj[i][j]) {
                    informed[j] = true;
                }
            }
            if informed.iter().all(|&b| b) {
                return Some(snap.time);
            }
        }
        None
    }

    #[test]
    fn three_vertex_instance_matches_brute_force() {
        let dom = Domain::torus(1, 30.0).unwrap();
        let vs = vec![
            Vertex { id: 0, pos: vec![0.0].into(), mark: 0.3 },
            Vertex { id: 1, pos: vec![1.0].into(), mark: 0.2 },
            Vertex { id: 2, pos: vec![12.0].into(), mark: 0.6 },
        ];
        let grid = uniform_grid(0.25, 20.0).unwrap();
        let mut late = 0;
        for seed in 0..60 {
            let c = PointCloud::from_vertices(dom, 0.1, true, vs.clone()).unwrap();
            let orc = oracle(c, 0.3, seed);
            let t = run_broadcast(&orc, &grid).unwrap();
            assert_eq!(t.t_bc, brute_force_t_bc(&orc, &grid), "seed {seed}");
            if t.t_bc.is_some_and(|x| x >= 1.0) {
                late += 1;
                // vertex 2 was not reached during epoch 0
                assert!(t.informed.iter().zip(&t.times).all(|(&c, &s)| s >= 1.0 || c < 3));
            }
        }
        assert!(late > 0);
    }

    #[test]
    fn survival_curve_counts() {
        let s = [Some(0.0), Some(2.0), None, Some(1.0)];
        assert_eq!(survival_curve(&s, &[0.0, 1.0, 2.0, 3.0]), vec![0.75, 0.5, 0.25, 0.25]);
    }
}
