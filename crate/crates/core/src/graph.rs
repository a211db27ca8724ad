//! The graph at one snapshot: edge enumeration and connected components.

use serde::Serialize;

use crate::dynamics::{EdgeOracle, EpochEdges, Snapshot};
use crate::error::{invalid, Error, Result};
use crate::geometry::Domain;
use crate::kernels::{mean_prob_at, unit_ball_volume};

/// Disjoint sets with path halving and union by size.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    #[inline]
    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] as usize != x {
            let p = self.parent[x] as usize;
            self.parent[x] = self.parent[p];
            x = p;
        }
        x
    }

    /// Merges the sets of `a` and `b`; returns whether they were distinct.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] || (self.size[ra] == self.size[rb] && rb < ra) {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra as u32;
        self.size[ra] += self.size[rb];
        true
    }

    pub fn labels(mut self) -> ComponentLabels {
        let n = self.parent.len();
        let mut min_member = vec![u32::MAX; n];
        for i in 0..n {
            let r = self.find(i);
            min_member[r] = min_member[r].min(i as u32);
        }
        let root: Vec<u32> = (0..n).map(|i| min_member[self.find(i)]).collect();
        ComponentLabels::from_roots(root)
    }
}

/// Connected components, each represented by its smallest cloud index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentLabels {
    pub root: Vec<u32>,
    /// `sizes[r]` is the size of the component represented by `r`, and 0
    /// for indices that are not representatives.
    pub sizes: Vec<u32>,
    pub num_components: usize,
    /// `(representative, size)`, ties broken towards the smaller index.
    pub largest: Option<(u32, u32)>,
    pub second_largest: Option<(u32, u32)>,
}

impl ComponentLabels {
    pub fn from_roots(root: Vec<u32>) -> Self {
        let n = root.len();
        let mut sizes = vec![0u32; n];
        for &r in &root {
            sizes[r as usize] += 1;
        }
        let mut reps: Vec<(u32, u32)> = (0..n as u32)
            .filter(|&r| sizes[r as usize] > 0)
            .map(|r| (r, sizes[r as usize]))
            .collect();
        reps.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        ComponentLabels {
            num_components: reps.len(),
            largest: reps.first().copied(),
            second_largest: reps.get(1).copied(),
            root,
            sizes,
        }
    }

    pub fn len(&self) -> usize {
        self.root.len()
    }

    pub fn is_empty(&self) -> bool {
        self.root.is_empty()
    }

    pub fn component_size(&self, i: usize) -> u32 {
        self.sizes[self.root[i] as usize]
    }

    pub fn same_component(&self, i: usize, j: usize) -> bool {
        self.root[i] == self.root[j]
    }

    pub fn largest_size(&self) -> u32 {
        self.largest.map_or(0, |l| l.1)
    }

    pub fn second_largest_size(&self) -> u32 {
        self.second_largest.map_or(0, |l| l.1)
    }
}

/// Regular grid of cells with side at least the query radius.
#[derive(Clone, Debug)]
pub struct CellIndex {
    pub cell_side: f64,
    dim: usize,
    torus: bool,
    origin: Vec<f64>,
    counts: Vec<usize>,
    /// CSR layout: members of cell `c` are `items[start[c]..start[c+1]]`.
    start: Vec<usize>,
    items: Vec<u32>,
    cell_of: Vec<usize>,
}

impl CellIndex {
    /// Buckets the snapshot's vertices into cells of side at least `radius`.
    pub fn build(snap: &Snapshot, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return invalid(format!("cell radius must be positive, got {radius}"));
        }
        let dom: &Domain = snap.domain();
        let d = dom.dim;
        let n = snap.len();
        let (origin, extent) = if dom.is_torus() {
            (vec![0.0; d], vec![dom.side; d])
        } else {
            let mut lo = vec![f64::INFINITY; d];
            let mut hi = vec![f64::NEG_INFINITY; d];
            for p in snap.positions.chunks(d) {
                for c in 0..d {
                    lo[c] = lo[c].min(p[c]);
                    hi[c] = hi[c].max(p[c]);
                }
            }
            if n == 0 {
                (vec![0.0; d], vec![1.0; d])
            } else {
                let ext = lo.iter().zip(&hi).map(|(l, h)| (h - l).max(radius)).collect();
                (lo, ext)
            }
        };
        // keep the cell count bounded by the vertex count
        let max_cells = (n.max(1) * 2) as f64;
        let mut side = radius;
        loop {
            let total: f64 = extent.iter().map(|e| (e / side).floor().max(1.0)).product();
            if total <= max_cells.max(1.0) {
                break;
            }
            side *= 1.5;
        }
        let counts: Vec<usize> = extent.iter().map(|e| ((e / side).floor() as usize).max(1)).collect();
        let cell_side = extent
            .iter()
            .zip(&counts)
            .map(|(e, &k)| e / k as f64)
            .fold(f64::INFINITY, f64::min);
        let mut index = CellIndex {
            cell_side,
            dim: d,
            torus: dom.is_torus(),
            origin,
            counts,
            start: Vec::new(),
            items: Vec::new(),
            cell_of: Vec::with_capacity(n),
        };
        let widths: Vec<f64> = extent.iter().zip(&index.counts).map(|(e, &k)| e / k as f64).collect();
        let total: usize = index.counts.iter().product();
        let mut fill = vec![0usize; total + 1];
        for p in snap.positions.chunks(d) {
            let mut cell = 0;
            let mut stride = 1;
            for c in 0..d {
                let k = index.counts[c];
                let x = ((p[c] - index.origin[c]) / widths[c]).floor();
                let x = (x.max(0.0) as usize).min(k - 1);
                cell += x * stride;
                stride *= k;
            }
            index.cell_of.push(cell);
            fill[cell + 1] += 1;
        }
        for c in 0..total {
            fill[c + 1] += fill[c];
        }
        index.start = fill.clone();
        index.items = vec![0; n];
        for (i, &cell) in index.cell_of.iter().enumerate() {
            index.items[fill[cell]] = i as u32;
            fill[cell] += 1;
        }
        Ok(index)
    }

    pub fn num_cells(&self) -> usize {
        self.start.len() - 1
    }

    pub fn cell_of(&self, i: usize) -> usize {
        self.cell_of[i]
    }

    pub fn members(&self, cell: usize) -> &[u32] {
        &self.items[self.start[cell]..self.start[cell + 1]]
    }

    /// The distinct cells within one step of `cell` along every axis.
    pub fn neighbourhood(&self, cell: usize, out: &mut Vec<usize>) {
        out.clear();
        let d = self.dim;
        let mut coord = vec![0usize; d];
        let mut rest = cell;
        for (x, &n) in coord.iter_mut().zip(&self.counts) {
            *x = rest % n;
            rest /= n;
        }
        let total = 3usize.pow(d as u32);
        'offsets: for code in 0..total {
            let mut cellid = 0;
            let mut stride = 1;
            let mut k = code;
            for (&x0, &count) in coord.iter().zip(&self.counts) {
                let off = (k % 3) as i64 - 1;
                k /= 3;
                let n = count as i64;
                let mut x = x0 as i64 + off;
                if self.torus {
                    x = x.rem_euclid(n);
                } else if x < 0 || x >= n {
                    continue 'offsets;
                }
                cellid += x as usize * stride;
                stride *= count;
            }
            out.push(cellid);
        }
        out.sort_unstable();
        out.dedup();
    }

    /// Calls `f(i, j, dist)` for every pair `i < j` at distance below
    /// `radius`, which must not exceed the cell side.
    pub fn for_each_close_pair(&self, snap: &Snapshot, radius: f64, mut f: impl FnMut(usize, usize, f64)) {
        let dom = snap.domain();
        let r2 = radius * radius;
        let mut nb = Vec::with_capacity(3usize.pow(self.dim as u32));
        for cell in 0..self.num_cells() {
            let here = self.members(cell);
            if here.is_empty() {
                continue;
            }
            self.neighbourhood(cell, &mut nb);
            for &other in &nb {
                if other < cell {
                    continue;
                }
                let there = self.members(other);
                for (a, &i) in here.iter().enumerate() {
                    let pi = snap.pos(i as usize);
                    let from = if other == cell { a + 1 } else { 0 };
                    for &j in &there[from..] {
                        let d2 = dom.dist2(pi, snap.pos(j as usize));
                        if d2 < r2 {
                            let (lo, hi) = if i < j { (i, j) } else { (j, i) };
                            f(lo as usize, hi as usize, d2.sqrt());
                        }
                    }
                }
            }
        }
    }
}

/// Components by testing every pair. Limited to `limit` vertices.
pub fn components_exact(snap: &Snapshot, orc: &EdgeOracle, limit: usize) -> Result<ComponentLabels> {
    orc.check_snapshot(snap)?;
    let n = snap.len();
    if n > limit {
        return Err(Error::ResourceLimit {
            what: "all-pairs component search vertices",
            requested: n,
            limit,
            advice: "use the cell-list component search instead",
        });
    }
    let edges = orc.epoch_edges(snap.epoch);
    let mut uf = UnionFind::new(n);
    for i in 0..n {
        for j in i + 1..n {
            if edges.has_edge(snap, i, j) {
                uf.union(i, j);
            }
        }
    }
    Ok(uf.labels())
}

/// Calls `f(i, j)` exactly once for every edge `i < j` of the snapshot.
///
/// Unflagged pairs are looked at only within `near` (the oracle's tail
/// radius unless a shorter one is given, in which case edges between the
/// two radii are missed). Flagged pairs are always tested.
pub fn for_each_edge(snap: &Snapshot, edges: &EpochEdges<'_>, near: Option<f64>, mut f: impl FnMut(usize, usize)) -> Result<()> {
    let orc = edges.oracle;
    orc.check_snapshot(snap)?;
    if snap.epoch != edges.epoch {
        return invalid("snapshot lies in a different epoch");
    }
    let n = snap.len();
    if n < 2 {
        return Ok(());
    }
    // margin so that pairs just beyond the tail radius cannot connect
    // through rounding
    let near = near.unwrap_or(orc.tail_radius()).min(orc.tail_radius()) * (1.0 + 1e-9);
    let cells = CellIndex::build(snap, near)?;
    cells.for_each_close_pair(snap, near, |i, j, dist| {
        if edges.has_edge_unflagged(dist, i, j) {
            f(i, j);
        }
    });
    for (k, &(i, j)) in edges.flagged.iter().enumerate() {
        let (i, j) = (i as usize, j as usize);
        let dist = snap.dist(i, j);
        if edges.has_edge_flagged(k, dist) {
            // skip edges already reported by the near pass
            if dist < near && edges.has_edge_unflagged(dist, i, j) {
                continue;
            }
            f(i, j);
        }
    }
    Ok(())
}

/// Components from the cell-list search plus the flagged long-range pairs.
#[derive(Clone, Debug)]
pub struct FastComponents {
    pub labels: ComponentLabels,
    /// Expected number of edges the search could not see; zero in exact mode.
    pub missed_edge_bound: f64,
}

/// Component labels using `edges` for the snapshot's epoch. With
/// `trunc >= ` the tail radius (or `None`) the result is exact.
pub fn components_fast_with(snap: &Snapshot, edges: &EpochEdges<'_>, trunc: Option<f64>) -> Result<FastComponents> {
    if let Some(t) = trunc {
        if !(t > 0.0) {
            return invalid(format!("truncation radius must be positive, got {t}"));
        }
    }
    let orc = edges.oracle;
    orc.check_snapshot(snap)?;
    if snap.epoch != edges.epoch {
        return invalid("snapshot lies in a different epoch");
    }
    let mut uf = UnionFind::new(snap.len());
    if snap.len() >= 2 {
        let near = trunc.unwrap_or(orc.tail_radius()).min(orc.tail_radius()) * (1.0 + 1e-9);
        // long-range pairs first: they are cheap and merge most of the
        // near pairs into one set, which then need no test
        for (k, &(i, j)) in edges.flagged.iter().enumerate() {
            let (i, j) = (i as usize, j as usize);
            if edges.has_edge_flagged(k, snap.dist(i, j)) {
                uf.union(i, j);
            }
        }
        let cells = CellIndex::build(snap, near)?;
        cells.for_each_close_pair(snap, near, |i, j, dist| {
            if uf.find(i) != uf.find(j) && edges.has_edge_unflagged(dist, i, j) {
                uf.union(i, j);
            }
        });
    }
    let rho = edges.oracle.tail_radius();
    let missed_edge_bound = match trunc {
        Some(t) if t < rho => missed_edges(edges.oracle, snap.domain(), t, rho),
        _ => 0.0,
    };
    if missed_edge_bound > 0.0 {
        log::info!("truncated component search may miss about {missed_edge_bound:.3} edges");
    }
    Ok(FastComponents {
        labels: uf.labels(),
        missed_edge_bound,
    })
}

pub fn components_fast(snap: &Snapshot, orc: &EdgeOracle, trunc: Option<f64>) -> Result<FastComponents> {
    components_fast_with(snap, &orc.epoch_edges(snap.epoch), trunc)
}

/// Expected number of pairs at distance in `[lo, hi)` that are edges,
/// which bounds what a search truncated at `lo` misses.
fn missed_edges(orc: &EdgeOracle, dom: &Domain, lo: f64, hi: f64) -> f64 {
    let d = dom.dim;
    let hi = hi.min(dom.diameter());
    if hi <= lo {
        return 0.0;
    }
    let shell = |r: f64| d as f64 * unit_ball_volume(d) * r.powi(d as i32 - 1) * mean_prob_at(&orc.kernel, r);
    let per_vertex = orc.cloud.intensity * quadrature::integrate(shell, lo, hi, 1e-6).integral;
    0.5 * orc.len() as f64 * per_vertex
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DegreeStats {
    /// `histogram[k]` is the number of vertices with degree `k`.
    pub histogram: Vec<u64>,
    pub mean: f64,
}

/// Degree distribution of the snapshot.
pub fn degree_stats(snap: &Snapshot, orc: &EdgeOracle) -> Result<DegreeStats> {
    let edges = orc.epoch_edges(snap.epoch);
    let degrees = degrees_with(snap, &edges)?;
    Ok(stats_from_degrees(&degrees))
}

pub fn degrees_with(snap: &Snapshot, edges: &EpochEdges<'_>) -> Result<Vec<u32>> {
    let mut deg = vec![0u32; snap.len()];
    for_each_edge(snap, edges, None, |i, j| {
        deg[i] += 1;
        deg[j] += 1;
    })?;
    Ok(deg)
}

pub fn stats_from_degrees(degrees: &[u32]) -> DegreeStats {
    if degrees.is_empty() {
        return DegreeStats {
            histogram: Vec::new(),
            mean: 0.0,
        };
    }
    let max = *degrees.iter().max().unwrap_or(&0) as usize;
    let mut histogram = vec![0u64; max + 1];
    for &k in degrees {
        histogram[k as usize] += 1;
    }
    let mean = degrees.iter().map(|&k| f64::from(k)).sum::<f64>() / degrees.len() as f64;
    DegreeStats { histogram, mean }
}

/// Neighbour lists of the snapshot, sorted.
pub fn adjacency(snap: &Snapshot, edges: &EpochEdges<'_>) -> Result<Vec<Vec<u32>>> {
    let mut adj = vec![Vec::new(); snap.len()];
    for_each_edge(snap, edges, None, |i, j| {
        adj[i].push(j as u32);
        adj[j].push(i as u32);
    })?;
    adj.iter_mut().for_each(|a| a.sort_unstable());
    Ok(adj)
}
