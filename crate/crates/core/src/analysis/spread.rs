use serde::Serialize;

use super::Cube;
use crate::dynamics::{EpochEdges, Snapshot};
use crate::error::{invalid, Error, Result};
use crate::graph::UnionFind;
use crate::pointprocess::{layer_of, MarkLayers};

/// Knobs of the nested-box construction inside a cube of volume `k`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpreadParams {
    pub k: f64,
    pub theta: f64,
    pub eps_theta: f64,
    /// Required fraction: success needs at least `b k` distinguished
    /// vertices. Defaults to `2^(-2 d)`.
    pub b: Option<f64>,
}

impl SpreadParams {
    pub fn b_or_default(&self, dim: usize) -> f64 {
        self.b.unwrap_or_else(|| 2f64.powi(-2 * dim as i32))
    }

    /// `(k_p, n_p)`.
    pub fn sizes(&self, dim: usize) -> Result<(u32, usize)> {
        if !(self.k > 1.0 && self.k.is_finite()) {
            return invalid(format!("K must exceed 1, got {}", self.k));
        }
        if !(self.eps_theta > 0.0 && self.eps_theta * 2f64.ln() < 1.0) {
            return invalid(format!("eps_theta must lie in (0, 1/ln 2), got {}", self.eps_theta));
        }
        let d = dim as f64;
        let k_p = (self.eps_theta * self.k.ln() / d).floor();
        let n_p = self.k.powf((1.0 - self.eps_theta * 2f64.ln()) / d).floor();
        if k_p < 0.0 || n_p < 1.0 {
            return invalid("K is too small for a single box");
        }
        Ok((k_p as u32, n_p as usize))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GoodBox {
    pub layer: u32,
    /// Cell index in the layer's grid, first axis fastest.
    pub cell: usize,
    /// Cloud index of the smallest-mark vertex of the box.
    pub rep: u32,
}

/// `child` and `parent` (cloud indices) joined through `connector`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Link {
    pub layer: u32,
    pub cell: usize,
    pub child: u32,
    pub parent: u32,
    pub connector: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpreadSubgraph {
    pub k: f64,
    pub k_p: u32,
    pub n_p: usize,
    pub cube: Cube,
    pub required: usize,
    pub boxes: Vec<GoodBox>,
    pub links: Vec<Link>,
    /// Representatives of the good boxes.
    pub distinguished: Vec<u32>,
    /// Representatives of the good top-layer boxes.
    pub bottom: Vec<u32>,
    pub top_boxes: usize,
    pub success: bool,
}

impl SpreadSubgraph {
    /// Whether every top-layer box holds a bottom vertex.
    pub fn covers_top_layer(&self) -> bool {
        self.bottom.len() == self.top_boxes
    }

    /// Cloud indices of the distinguished vertices and the connectors.
    pub fn vertices(&self) -> Vec<u32> {
        let mut v: Vec<u32> = self.distinguished.iter().copied().chain(self.links.iter().map(|l| l.connector)).collect();
        v.sort_unstable();
        v
    }
}

/// The `i`-th cell of a snake (boustrophedon) walk over `n^d` cells; the
/// walk starts at the zero cell and consecutive cells share a face.
pub(crate) fn snake_cell(i: usize, n: usize, d: usize) -> usize {
    let mut digits = vec![0usize; d];
    let mut rest = i;
    for digit in digits.iter_mut() {
        *digit = rest % n;
        rest /= n;
    }
    // digits[d - 1] is the slowest axis; the walk over the faster axes runs
    // backwards whenever the coordinates already fixed sum to an odd number
    let mut parity = 0;
    let mut cell = 0;
    for j in (0..d).rev() {
        let raw = digits[j];
        let c = if parity % 2 == 1 { n - 1 - raw } else { raw };
        parity += c;
        cell += c * n.pow(j as u32);
    }
    cell
}

fn coords(cell: usize, n: usize, d: usize) -> Vec<usize> {
    let mut c = Vec::with_capacity(d);
    let mut rest = cell;
    for _ in 0..d {
        c.push(rest % n);
        rest /= n;
    }
    c
}

fn index(c: &[usize], n: usize) -> usize {
    c.iter().rev().fold(0, |acc, &x| acc * n + x)
}

struct Grid<'a> {
    cube: &'a Cube,
    dim: usize,
    k_p: u32,
    n_p: usize,
}

impl Grid<'_> {
    fn per_side(&self, k: u32) -> usize {
        self.n_p << (self.k_p - k)
    }

    fn cells(&self, k: u32) -> usize {
        self.per_side(k).pow(self.dim as u32)
    }

    fn cell_of(&self, p: &[f64], k: u32) -> Option<usize> {
        self.cube.cell_of(p, f64::from(1u32 << k), self.per_side(k))
    }

    fn parent(&self, cell: usize, k: u32) -> usize {
        let c: Vec<usize> = coords(cell, self.per_side(k), self.dim).iter().map(|x| x / 2).collect();
        index(&c, self.per_side(k + 1))
    }

    /// Finest cells inside cell `cell` of layer `k`.
    fn finest_inside(&self, cell: usize, k: u32) -> Vec<usize> {
        let base: Vec<usize> = coords(cell, self.per_side(k), self.dim).iter().map(|x| x << k).collect();
        let w = 1usize << k;
        let n0 = self.per_side(0);
        (0..w.pow(self.dim as u32))
            .map(|o| {
                let off = coords(o, w, self.dim);
                let c: Vec<usize> = base.iter().zip(&off).map(|(b, o)| b + o).collect();
                index(&c, n0)
            })
            .collect()
    }
}

/// Builds the nested-box subgraph inside `cube` for one snapshot.
///
/// Layer `k` tessellates the first `n_p 2^k_p` units of each axis into boxes
/// of side `2^k`; a box holds the vertices of mark layer `I_k` and is
/// represented by its smallest mark. The top-layer boxes are chained along a
/// snake walk, every lower box is linked to its parent, and each link needs
/// a connector of mark at least 1/2 inside the lower box, adjacent to both
/// representatives. A connector is used at most once. A box is good when it
/// is non-empty, linked, and its predecessor in the chain (top layer) or its
/// parent (lower layers) is good.
pub fn build_spread_subgraph(
    snap: &Snapshot,
    edges: &EpochEdges<'_>,
    cube: &Cube,
    params: &SpreadParams,
) -> Result<SpreadSubgraph> {
    let orc = edges.oracle;
    orc.check_snapshot(snap)?;
    if snap.epoch != edges.epoch {
        return invalid("snapshot lies in a different epoch");
    }
    let kp = &orc.kernel;
    if !kp.is_ultrasmall() {
        return invalid(format!(
            "spread subgraphs need gamma > delta/(delta+1); got gamma={}, delta={}",
            kp.gamma, kp.delta
        ));
    }
    let dim = snap.domain().dim;
    if cube.dim() != dim {
        return invalid("cube and snapshot dimensions differ");
    }
    let (k_p, n_p) = params.sizes(dim)?;
    let span = (n_p as f64) * f64::from(1u32 << k_p);
    if cube.side < span {
        return invalid(format!("cube side {} is below n_p 2^k_p = {span}", cube.side));
    }
    let layers = MarkLayers::new(params.theta, params.eps_theta, params.k, dim)?;
    debug_assert_eq!(layers.k_max, k_p as i32);
    let grid = Grid { cube, dim, k_p, n_p };

    let marks: Vec<f64> = snap.cloud.marks().collect();
    let mut reps: Vec<Vec<Option<u32>>> = (0..=k_p).map(|k| vec![None; grid.cells(k)]).collect();
    let mut pool: Vec<Vec<u32>> = vec![Vec::new(); grid.cells(0)];
    for (i, &u) in marks.iter().enumerate() {
        let p = snap.pos(i);
        if u >= 0.5 {
            if let Some(c) = grid.cell_of(p, 0) {
                pool[c].push(i as u32);
            }
            continue;
        }
        let Some(k) = layer_of(u, &layers) else { continue };
        let k = k as u32;
        if let Some(c) = grid.cell_of(p, k) {
            let slot = &mut reps[k as usize][c];
            if slot.is_none_or(|r| u < marks[r as usize]) {
                *slot = Some(i as u32);
            }
        }
    }

    let mut used = vec![false; marks.len()];
    let mut connect = |k: u32, cell: usize, a: u32, b: u32| -> Option<u32> {
        let mut cands: Vec<u32> = grid.finest_inside(cell, k).into_iter().flat_map(|c| pool[c].iter().copied()).collect();
        cands.sort_unstable();
        let hit = cands.into_iter().find(|&z| {
            !used[z as usize]
                && edges.has_edge(snap, z as usize, a as usize)
                && edges.has_edge(snap, z as usize, b as usize)
        })?;
        used[hit as usize] = true;
        Some(hit)
    };

    let mut good: Vec<Vec<bool>> = (0..=k_p).map(|k| vec![false; grid.cells(k)]).collect();
    let mut boxes = Vec::new();
    let mut links = Vec::new();
    let top = k_p as usize;
    let top_boxes = grid.cells(k_p);
    let mut prev: Option<u32> = None;
    for i in 0..top_boxes {
        let cell = snake_cell(i, n_p, dim);
        let Some(rep) = reps[top][cell] else { break };
        if let Some(p) = prev {
            let Some(z) = connect(k_p, cell, rep, p) else { break };
            links.push(Link { layer: k_p, cell, child: rep, parent: p, connector: z });
        }
        good[top][cell] = true;
        boxes.push(GoodBox { layer: k_p, cell, rep });
        prev = Some(rep);
    }
    for k in (0..k_p).rev() {
        for cell in 0..grid.cells(k) {
            let pc = grid.parent(cell, k);
            if !good[k as usize + 1][pc] {
                continue;
            }
            let Some(rep) = reps[k as usize][cell] else { continue };
            let parent = reps[k as usize + 1][pc].expect("good boxes are non-empty");
            if let Some(z) = connect(k, cell, rep, parent) {
                links.push(Link { layer: k, cell, child: rep, parent, connector: z });
                good[k as usize][cell] = true;
                boxes.push(GoodBox { layer: k, cell, rep });
            }
        }
    }
    let distinguished: Vec<u32> = boxes.iter().map(|b| b.rep).collect();
    let bottom: Vec<u32> = boxes.iter().filter(|b| b.layer == k_p).map(|b| b.rep).collect();
    let required = (params.b_or_default(dim) * params.k).ceil() as usize;
    let success = distinguished.len() >= required && bottom.len() == top_boxes;
    Ok(SpreadSubgraph {
        k: params.k,
        k_p,
        n_p,
        cube: cube.clone(),
        required,
        boxes,
        links,
        distinguished,
        bottom,
        top_boxes,
        success,
    })
}

/// Re-checks a reported subgraph against the oracle: connectors are distinct,
/// have mark at least 1/2, lie in their box and are adjacent to both ends;
/// representatives lie in their box and mark window; the distinguished
/// vertices form one component; bottom marks are below the top window's
/// upper end; and the success flag matches both clauses.
pub fn verify_spread(snap: &Snapshot, edges: &EpochEdges<'_>, sg: &SpreadSubgraph, params: &SpreadParams) -> Result<()> {
    let fail = |msg: String| Err(Error::InvalidInput(format!("spread subgraph check failed: {msg}")));
    let dim = snap.domain().dim;
    let (k_p, n_p) = params.sizes(dim)?;
    if (k_p, n_p) != (sg.k_p, sg.n_p) {
        return fail("box sizes differ from the parameters".into());
    }
    let layers = MarkLayers::new(params.theta, params.eps_theta, params.k, dim)?;
    let grid = Grid { cube: &sg.cube, dim, k_p, n_p };
    let marks: Vec<f64> = snap.cloud.marks().collect();
    let n = marks.len();
    let mut seen = vec![false; n];
    for b in &sg.boxes {
        let r = b.rep as usize;
        if r >= n || seen[r] {
            return fail(format!("representative {r} is repeated or out of range"));
        }
        seen[r] = true;
        let (lo, hi) = layers.interval(b.layer as i32);
        if !(marks[r] > lo && marks[r] < hi) {
            return fail(format!("representative {r} has mark outside layer {}", b.layer));
        }
        if grid.cell_of(snap.pos(r), b.layer) != Some(b.cell) {
            return fail(format!("representative {r} lies outside its box"));
        }
    }
    let mut uf = UnionFind::new(n);
    for l in &sg.links {
        let z = l.connector as usize;
        if z >= n || seen[z] {
            return fail(format!("connector {z} is reused or out of range"));
        }
        seen[z] = true;
        if marks[z] < 0.5 {
            return fail(format!("connector {z} has mark below 1/2"));
        }
        if grid.cell_of(snap.pos(z), l.layer) != Some(l.cell) {
            return fail(format!("connector {z} lies outside its box"));
        }
        for end in [l.child, l.parent] {
            if !edges.has_edge(snap, z, end as usize) {
                return fail(format!("connector {z} is not adjacent to {end}"));
            }
            uf.union(z, end as usize);
        }
    }
    if let Some(&first) = sg.distinguished.first() {
        let root = uf.find(first as usize);
        if sg.distinguished.iter().any(|&v| uf.find(v as usize) != root) {
            return fail("distinguished vertices are not connected".into());
        }
    }
    let ceiling = layers.interval(k_p as i32).1;
    if sg.bottom.iter().any(|&v| marks[v as usize] >= ceiling) {
        return fail("a bottom vertex has too large a mark".into());
    }
    let mut covered = vec![false; grid.cells(k_p)];
    for &v in &sg.bottom {
        if let Some(c) = grid.cell_of(snap.pos(v as usize), k_p) {
            covered[c] = true;
        }
    }
    let clauses = sg.distinguished.len() >= sg.required && covered.iter().all(|&c| c);
    if clauses != sg.success {
        return fail(format!("success flag {} but clauses evaluate to {clauses}", sg.success));
    }
    Ok(())
}
