//! Time evolution and the per-epoch edge randomness.
//!
//! Vertex paths are Brownian motions built by dyadic midpoint refinement:
//! the value at an integer time is a sum of keyed unit increments, and the
//! value at a dyadic time inside an epoch is filled in by Brownian bridges
//! whose normals are keyed by their position in the dyadic tree. Observing
//! the same seed on a finer dyadic grid therefore sees exactly the same
//! positions at the shared times. Grid times are rounded to multiples of
//! `2^-20`.
//!
//! Edges follow one uniform `U` per pair and epoch: the pair is connected at
//! time `t` iff `U < p(dist_t, u, v)`. The uniform is assembled from two
//! independent pieces so that the pairs that can connect at long range can
//! be listed without touching all pairs. Fix a tail radius `rho` and let
//! `q = p(rho, u, v)`. A flag `F ~ Bernoulli(q)` and a body `V ~ U(0,1)` give
//! `U = q V` when flagged and `U = q + (1 - q) V` otherwise, which is exactly
//! uniform. Beyond `rho` only flagged pairs can be edges, and within `rho`
//! every flagged pair is one. Flags are generated per owner vertex (the
//! endpoint with the larger mark) by geometric skipping over partners sorted
//! by mark.

use std::sync::{Arc, OnceLock};

use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::Domain;
use crate::kernels::{mean_prob_at, unit_ball_volume, KernelParams, Variant};
use crate::pointprocess::PointCloud;
use crate::rng::{tag, Key};

/// Grid times are snapped to this lattice.
pub const TIME_RESOLUTION_BITS: u32 = 20;
const TIME_SCALE: f64 = (1u64 << TIME_RESOLUTION_BITS) as f64;

/// Splits a time into its epoch and the dyadic offset inside it.
fn split_time(t: f64) -> (u32, u32) {
    let ticks = (t * TIME_SCALE).round() as u64;
    ((ticks >> TIME_RESOLUTION_BITS) as u32, (ticks & ((1 << TIME_RESOLUTION_BITS) - 1)) as u32)
}

/// Snaps `t` to the time lattice.
pub fn snap_time(t: f64) -> f64 {
    let (e, f) = split_time(t);
    f64::from(e) + f64::from(f) / TIME_SCALE
}

/// `0, dt, 2 dt, ...` up to and including `t_max` (within rounding).
pub fn uniform_grid(dt: f64, t_max: f64) -> Result<Vec<f64>> {
    if !(dt > 0.0 && dt.is_finite()) || !(t_max >= 0.0 && t_max.is_finite()) {
        return invalid(format!("need dt > 0 and t_max >= 0, got dt={dt} t_max={t_max}"));
    }
    let steps = (t_max / dt + 1e-9).floor() as usize;
    Ok((0..=steps).map(|k| k as f64 * dt).collect())
}

/// All vertex positions at one observation time.
#[derive(Clone, Debug)]
pub struct Snapshot {
    pub time: f64,
    pub epoch: u32,
    /// Flat `len * dim` array in cloud order.
    pub positions: Vec<f64>,
    pub cloud: Arc<PointCloud>,
}

impl Snapshot {
    /// The snapshot at time zero.
    pub fn initial(cloud: Arc<PointCloud>) -> Self {
        let positions = cloud.vertices.iter().flat_map(|v| v.pos.iter().copied()).collect();
        Snapshot {
            time: 0.0,
            epoch: 0,
            positions,
            cloud,
        }
    }

    /// A snapshot with explicitly given positions, e.g. for hand-built cases.
    pub fn with_positions(cloud: Arc<PointCloud>, time: f64, positions: Vec<f64>) -> Result<Self> {
        let dom = &cloud.domain;
        if positions.len() != cloud.len() * dom.dim {
            return invalid("position array does not match the cloud");
        }
        if !(time >= 0.0 && time.is_finite()) {
            return invalid(format!("time must be nonnegative, got {time}"));
        }
        if positions.chunks(dom.dim).any(|p| !dom.contains(p)) {
            return invalid("position outside the domain");
        }
        Ok(Snapshot {
            time,
            epoch: time.floor() as u32,
            positions,
            cloud,
        })
    }

    pub fn len(&self) -> usize {
        self.cloud.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cloud.is_empty()
    }

    pub fn domain(&self) -> &Domain {
        &self.cloud.domain
    }

    #[inline]
    pub fn pos(&self, i: usize) -> &[f64] {
        let d = self.cloud.domain.dim;
        &self.positions[i * d..(i + 1) * d]
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.cloud.domain.dist2(self.pos(i), self.pos(j)).sqrt()
    }
}

/// Keyed Brownian paths for the vertices of one cloud.
#[derive(Clone, Debug)]
pub struct Motion {
    key: Key,
    cloud: Arc<PointCloud>,
    /// Displacement at the start of `epoch`, flat.
    base: Vec<f64>,
    epoch: u32,
}

impl Motion {
    pub fn new(cloud: Arc<PointCloud>, seed: u64) -> Self {
        let base = vec![0.0; cloud.len() * cloud.domain.dim];
        Motion {
            key: Key::from_seed(seed),
            cloud,
            base,
            epoch: 0,
        }
    }

    /// Normals for (vertex, epoch, dyadic node), two coordinates per call.
    #[inline]
    fn normals(&self, id: u32, epoch: u32, node: u32, out: &mut [f64]) {
        for (c, chunk) in out.chunks_mut(2).enumerate() {
            let (u1, u2) = self.key.uniforms([id, tag::MOTION | c as u32, epoch, node]);
            let r = (-2.0 * u1.ln()).sqrt();
            let (s, co) = (std::f64::consts::TAU * u2).sin_cos();
            chunk[0] = r * co;
            if chunk.len() > 1 {
                chunk[1] = r * s;
            }
        }
    }

    fn advance_to(&mut self, epoch: u32) {
        if epoch < self.epoch {
            self.base.iter_mut().for_each(|x| *x = 0.0);
            self.epoch = 0;
        }
        let d = self.cloud.domain.dim;
        let mut z = vec![0.0; d];
        while self.epoch < epoch {
            for (i, v) in self.cloud.vertices.iter().enumerate() {
                self.normals(v.id, self.epoch, 0, &mut z);
                for (b, dz) in self.base[i * d..(i + 1) * d].iter_mut().zip(&z) {
                    *b += dz;
                }
            }
            self.epoch += 1;
        }
    }

    /// Displacement of vertex `i` at offset `frac / 2^20` into the current
    /// epoch, written into `out`.
    fn bridge(&self, i: usize, frac: u32, out: &mut [f64]) {
        let d = out.len();
        let id = self.cloud.vertices[i].id;
        let mut lo = vec![0.0; d];
        let mut hi = vec![0.0; d];
        self.normals(id, self.epoch, 0, &mut hi);
        let mut z = vec![0.0; d];
        // interval [a, a + len) in units of 2^-20
        let (mut a, mut len) = (0u32, 1u32 << TIME_RESOLUTION_BITS);
        let mut level = 0;
        while frac != a {
            level += 1;
            len >>= 1;
            let mid = a + len;
            let j = mid >> (TIME_RESOLUTION_BITS - level);
            self.normals(id, self.epoch, (level << 21) | j, &mut z);
            let sd = (f64::from(len) * 2.0 / TIME_SCALE / 4.0).sqrt();
            for c in 0..d {
                let m = 0.5 * (lo[c] + hi[c]) + sd * z[c];
                if frac >= mid {
                    lo[c] = m;
                } else {
                    hi[c] = m;
                }
            }
            if frac >= mid {
                a = mid;
            }
        }
        let i0 = i * d;
        for c in 0..d {
            out[c] = self.base[i0 + c] + lo[c];
        }
    }

    /// Positions of all vertices at time `t` (snapped to the lattice).
    pub fn positions_at(&mut self, t: f64) -> Result<Vec<f64>> {
        if !(t >= 0.0 && t.is_finite()) {
            return invalid(format!("time must be nonnegative, got {t}"));
        }
        let (epoch, frac) = split_time(t);
        self.advance_to(epoch);
        let dom = self.cloud.domain;
        let d = dom.dim;
        let mut out = vec![0.0; self.cloud.len() * d];
        let mut disp = vec![0.0; d];
        for (i, v) in self.cloud.vertices.iter().enumerate() {
            self.bridge(i, frac, &mut disp);
            for c in 0..d {
                out[i * d + c] = dom.wrap_coord(v.pos[c] + disp[c]);
            }
        }
        Ok(out)
    }

    pub fn snapshot(&mut self, t: f64) -> Result<Snapshot> {
        let positions = self.positions_at(t)?;
        let time = snap_time(t);
        Ok(Snapshot {
            time,
            epoch: time.floor() as u32,
            positions,
            cloud: Arc::clone(&self.cloud),
        })
    }
}

/// Iterator of snapshots over an observation grid.
pub struct Evolution {
    motion: Motion,
    grid: std::vec::IntoIter<f64>,
}

impl Iterator for Evolution {
    type Item = Snapshot;

    fn next(&mut self) -> Option<Snapshot> {
        let t = self.grid.next()?;
        // the grid was validated, so this cannot fail
        self.motion.snapshot(t).ok()
    }
}

/// Snapshots of `cloud` at the grid times. Paths depend only on `seed` and
/// the vertex ids.
pub fn evolve(cloud: Arc<PointCloud>, t_grid: &[f64], seed: u64) -> Result<Evolution> {
    validate_grid(t_grid)?;
    Ok(Evolution {
        motion: Motion::new(cloud, seed),
        grid: Vec::from(t_grid).into_iter(),
    })
}

pub fn validate_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return invalid("grid times must be finite and nonnegative");
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return invalid("grid times must be strictly increasing");
    }
    if t_grid.iter().any(|&t| t >= f64::from(u32::MAX)) {
        return invalid("grid time too large");
    }
    Ok(())
}

/// How the oracle chooses the radius beyond which only flagged pairs can
/// connect.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode", content = "value")]
pub enum TailRadius {
    /// Balances near-pair enumeration against flagged pairs.
    Auto,
    Fixed(f64),
    /// The domain diameter: nothing is flagged beyond it, so single pair
    /// queries are cheap. Suited to small clouds.
    Diameter,
}

const POW_SUB_BITS: u32 = 4;
const POW_EXP_RANGE: i32 = 60;

/// Upper bound for `x^-e` by table lookup on the binary exponent and the
/// leading mantissa bits of `x`; tight to a factor `(17/16)^e`.
#[derive(Clone, Debug)]
struct PowBound {
    e: f64,
    table: Vec<f64>,
}

impl PowBound {
    fn new(e: f64) -> Self {
        let sub = 1usize << POW_SUB_BITS;
        let mut table = Vec::with_capacity(2 * POW_EXP_RANGE as usize * sub);
        for ex in -POW_EXP_RANGE..POW_EXP_RANGE {
            for k in 0..sub {
                let lo = (1.0 + k as f64 / sub as f64) * 2f64.powi(ex);
                table.push(lo.powf(-e) * (1.0 + 1e-12));
            }
        }
        PowBound { e, table }
    }

    #[inline]
    fn upper(&self, x: f64) -> f64 {
        let bits = x.to_bits();
        let ex = ((bits >> 52) & 0x7ff) as i32 - 1023;
        if !(-POW_EXP_RANGE..POW_EXP_RANGE).contains(&ex) {
            return x.powf(-self.e) * (1.0 + 1e-12);
        }
        let k = ((bits >> (52 - POW_SUB_BITS)) & ((1 << POW_SUB_BITS) - 1)) as usize;
        self.table[(((ex + POW_EXP_RANGE) as usize) << POW_SUB_BITS) | k]
    }
}

/// Deterministic per-epoch edge uniforms for the vertices of one cloud.
///
/// Every kernel variant has the form `cap * min(1, (r / L)^-e)` with
/// `e = delta d` and a pair scale `L` built from per-vertex factors, which
/// are cached here.
#[derive(Clone, Debug)]
pub struct EdgeOracle {
    seed: u64,
    key: Key,
    pub kernel: KernelParams,
    pub cloud: Arc<PointCloud>,
    tail_radius: f64,
    /// Cloud indices sorted by (mark, id).
    order: Vec<u32>,
    rank: Vec<u32>,
    cap: f64,
    expo: f64,
    scale_a: Vec<f64>,
    scale_b: Vec<f64>,
    /// Flag probability with this vertex as the stronger end (generic kernel).
    tail_q: Vec<f64>,
    pow: PowBound,
}

impl EdgeOracle {
    pub fn new(seed: u64, kernel: KernelParams, cloud: Arc<PointCloud>, tail: TailRadius) -> Result<Self> {
        kernel.validate()?;
        if kernel.dim != cloud.domain.dim {
            return invalid("kernel and domain dimensions differ");
        }
        let diam = cloud.domain.diameter();
        let tail_radius = match tail {
            TailRadius::Fixed(r) if r > 0.0 && r.is_finite() => r,
            TailRadius::Fixed(r) => return invalid(format!("tail radius must be positive, got {r}")),
            TailRadius::Diameter => diam * (1.0 + 1e-9),
            TailRadius::Auto => auto_tail_radius(&kernel, cloud.intensity, &cloud.domain, cloud.len()),
        };
        let n = cloud.len();
        let mut order: Vec<u32> = (0..n as u32).collect();
        let vs = &cloud.vertices;
        order.sort_by(|&a, &b| {
            let (va, vb) = (&vs[a as usize], &vs[b as usize]);
            va.mark.total_cmp(&vb.mark).then(va.id.cmp(&vb.id))
        });
        let mut rank = vec![0u32; n];
        for (r, &i) in order.iter().enumerate() {
            rank[i as usize] = r as u32;
        }
        let d = kernel.dim as f64;
        let (g, dl) = (kernel.gamma, kernel.delta);
        let expo = dl * d;
        let (scale_a, scale_b): (Vec<f64>, Vec<f64>) = vs
            .iter()
            .map(|v| match kernel.variant {
                Variant::Generic => (kernel.kappa1.powf(1.0 / expo) * v.mark.powf(-g / d), 1.0),
                Variant::SoftBoolean => (v.mark.powf(-g / d), 1.0),
                Variant::AgeRcm => (
                    (kernel.beta / v.mark.powf(g)).powf(1.0 / d),
                    v.mark.powf(-(1.0 - g) / d),
                ),
            })
            .unzip();
        let mut orc = EdgeOracle {
            seed,
            key: Key::from_seed(seed),
            kernel,
            cloud,
            tail_radius,
            order,
            rank,
            cap: kernel.max_prob(),
            expo,
            scale_a,
            scale_b,
            tail_q: Vec::new(),
            pow: PowBound::new(expo),
        };
        if kernel.variant == Variant::Generic {
            orc.tail_q = (0..n).map(|i| orc.profile(tail_radius / orc.scale_a[i])).collect();
        }
        Ok(orc)
    }

    /// The run seed; vertex paths are keyed by it as well.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn tail_radius(&self) -> f64 {
        self.tail_radius
    }

    pub fn len(&self) -> usize {
        self.cloud.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cloud.is_empty()
    }

    /// `(stronger, weaker)` by mark rank.
    #[inline]
    fn ordered(&self, i: usize, j: usize) -> (usize, usize) {
        if self.rank[i] < self.rank[j] {
            (i, j)
        } else {
            (j, i)
        }
    }

    #[inline]
    fn pair_scale(&self, i: usize, j: usize) -> f64 {
        match self.kernel.variant {
            Variant::Generic => self.scale_a[self.ordered(i, j).0],
            Variant::SoftBoolean => self.scale_a[i] + self.scale_a[j],
            Variant::AgeRcm => {
                let (m, big) = self.ordered(i, j);
                self.scale_a[m] * self.scale_b[big]
            }
        }
    }

    #[inline]
    fn profile(&self, x: f64) -> f64 {
        if x <= 1.0 {
            self.cap
        } else {
            self.cap * x.powf(-self.expo)
        }
    }

    /// Kernel value for the pair `(i, j)` at distance `r`.
    #[inline]
    pub fn prob(&self, r: f64, i: usize, j: usize) -> f64 {
        self.profile(r / self.pair_scale(i, j))
    }

    /// An upper bound on `prob`, cheap to evaluate.
    #[inline]
    fn prob_upper(&self, r: f64, i: usize, j: usize) -> f64 {
        let x = r / self.pair_scale(i, j);
        if x <= 1.0 {
            self.cap
        } else {
            self.cap * self.pow.upper(x)
        }
    }

    /// Distance below which the pair is connected given uniform `u`.
    #[inline]
    fn threshold(&self, u: f64, i: usize, j: usize) -> f64 {
        if u >= self.cap {
            0.0
        } else {
            self.pair_scale(i, j) * (u / self.cap).powf(-1.0 / self.expo)
        }
    }

    /// Flag probability of a pair.
    #[inline]
    pub fn tail_prob(&self, i: usize, j: usize) -> f64 {
        if self.kernel.variant == Variant::Generic {
            self.tail_q[self.ordered(i, j).0]
        } else {
            self.prob(self.tail_radius, i, j)
        }
    }

    /// Partners (cloud indices) flagged by `owner` in `epoch`, in mark order.
    /// Partners are exactly the vertices ranked below the owner.
    fn owner_flags(&self, owner: usize, epoch: u32, out: &mut Vec<u32>) {
        let r_owner = self.rank[owner] as usize;
        let id = self.cloud.vertices[owner].id;
        let mut stream = self.key.stream([epoch, tag::TAIL, id]);
        let mut start = 0usize;
        let mut width = 1usize;
        while start < r_owner {
            let end = (start + width).min(r_owner);
            let qbar = self.tail_prob(owner, self.order[start] as usize);
            if qbar > 0.0 {
                let log_miss = (-qbar).ln_1p();
                let mut pos = start;
                loop {
                    if qbar < 1.0 {
                        let skip = stream.next_open01().ln() / log_miss;
                        if skip >= (end - pos) as f64 {
                            break;
                        }
                        pos += skip as usize;
                    }
                    if pos >= end {
                        break;
                    }
                    let partner = self.order[pos] as usize;
                    let q = self.tail_prob(owner, partner);
                    if q >= qbar || stream.next_open01() * qbar < q {
                        out.push(partner as u32);
                    }
                    pos += 1;
                }
            }
            start = end;
            width *= 2;
        }
    }

    fn check_pair(&self, i: usize, j: usize) -> Result<()> {
        if i == j {
            return invalid("a vertex is never its own neighbour");
        }
        if i >= self.len() || j >= self.len() {
            return invalid("vertex index out of range");
        }
        Ok(())
    }

    /// Whether the pair is flagged in `epoch`, by replaying its owner.
    fn is_flagged(&self, i: usize, j: usize, epoch: u32) -> bool {
        let (partner, owner) = self.ordered(i, j);
        let mut flags = Vec::new();
        self.owner_flags(owner, epoch, &mut flags);
        flags.contains(&(partner as u32))
    }

    #[inline]
    fn body(&self, i: usize, j: usize, epoch: u32) -> f64 {
        let (a, b) = (self.cloud.vertices[i].id, self.cloud.vertices[j].id);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        self.key.uniform([epoch, tag::PAIR, lo, hi])
    }

    #[inline]
    fn assemble(&self, q: f64, v: f64, flagged: bool) -> f64 {
        if flagged {
            q * v
        } else {
            q + (1.0 - q) * v
        }
    }

    #[inline]
    fn uniform_of(&self, i: usize, j: usize, epoch: u32, flagged: bool) -> f64 {
        self.assemble(self.tail_prob(i, j), self.body(i, j, epoch), flagged)
    }

    /// The edge uniform of the pair (cloud indices) in `epoch`.
    pub fn pair_uniform(&self, i: usize, j: usize, epoch: u32) -> Result<f64> {
        self.check_pair(i, j)?;
        Ok(self.uniform_of(i, j, epoch, self.is_flagged(i, j, epoch)))
    }

    /// Whether `i` and `j` (cloud indices) are adjacent in the snapshot.
    pub fn has_edge(&self, snap: &Snapshot, i: usize, j: usize) -> Result<bool> {
        self.check_snapshot(snap)?;
        let u = self.pair_uniform(i, j, snap.epoch)?;
        Ok(u < self.prob(snap.dist(i, j), i, j))
    }

    pub(crate) fn check_snapshot(&self, snap: &Snapshot) -> Result<()> {
        if !Arc::ptr_eq(&snap.cloud, &self.cloud) && *snap.cloud != *self.cloud {
            return invalid("snapshot and oracle refer to different clouds");
        }
        Ok(())
    }

    /// All flags of one epoch.
    pub fn epoch_edges(&self, epoch: u32) -> EpochEdges<'_> {
        let mut flagged = Vec::new();
        let mut radii = Vec::new();
        let mut buf = Vec::new();
        for owner in 0..self.len() {
            buf.clear();
            self.owner_flags(owner, epoch, &mut buf);
            for &p in &buf {
                let p = p as usize;
                let u = self.uniform_of(owner, p, epoch, true);
                flagged.push((owner.min(p) as u32, owner.max(p) as u32));
                radii.push(self.threshold(u, owner, p));
            }
        }
        EpochEdges {
            oracle: self,
            epoch,
            flagged,
            radii,
            set: OnceLock::new(),
        }
    }
}

/// Cost-balancing tail radius: per vertex, `lambda V_d rho^d` near pairs
/// against `N E[p(rho)]` flagged ones, the former weighted by their higher
/// per-pair cost. Capped at the domain diameter.
pub fn auto_tail_radius(kp: &KernelParams, lambda: f64, dom: &Domain, n: usize) -> f64 {
    const NEAR_WEIGHT: f64 = 1.6;
    let diam = dom.diameter() * (1.0 + 1e-9);
    if n < 2 {
        return diam;
    }
    let vd = unit_ball_volume(dom.dim);
    let cost = |r: f64| {
        let near = (lambda * vd * r.powi(dom.dim as i32)).min(n as f64);
        NEAR_WEIGHT * near + n as f64 * mean_prob_at(kp, r)
    };
    let mut best = (cost(diam), diam);
    let mut r = 0.5;
    while r < diam {
        let c = cost(r);
        if c < best.0 {
            best = (c, r);
        }
        r *= 1.15;
    }
    best.1
}

/// The flagged pairs of one epoch with their threshold radii.
#[derive(Debug)]
pub struct EpochEdges<'a> {
    pub oracle: &'a EdgeOracle,
    pub epoch: u32,
    /// `(lo, hi)` cloud-index pairs.
    pub flagged: Vec<(u32, u32)>,
    radii: Vec<f64>,
    set: OnceLock<FxHashSet<(u32, u32)>>,
}

impl EpochEdges<'_> {
    pub fn is_flagged(&self, i: usize, j: usize) -> bool {
        self.set
            .get_or_init(|| self.flagged.iter().copied().collect())
            .contains(&(i.min(j) as u32, i.max(j) as u32))
    }

    pub fn pair_uniform(&self, i: usize, j: usize) -> f64 {
        self.oracle.uniform_of(i, j, self.epoch, self.is_flagged(i, j))
    }

    /// Edge test for a snapshot in this epoch. Callers guarantee `i != j`.
    pub fn has_edge(&self, snap: &Snapshot, i: usize, j: usize) -> bool {
        self.pair_uniform(i, j) < self.oracle.prob(snap.dist(i, j), i, j)
    }

    /// Edge test for a pair evaluated as if unflagged. A flagged pair that
    /// passes is an edge as well, since its true uniform is smaller.
    #[inline]
    pub(crate) fn has_edge_unflagged(&self, dist: f64, i: usize, j: usize) -> bool {
        let orc = self.oracle;
        let v = orc.body(i, j, self.epoch);
        // the uniform is at least v, so a cheap bound rejects most pairs
        if v >= orc.prob_upper(dist, i, j) {
            return false;
        }
        orc.assemble(orc.tail_prob(i, j), v, false) < orc.prob(dist, i, j)
    }

    /// Edge test for the `k`-th flagged pair at distance `dist`.
    #[inline]
    pub(crate) fn has_edge_flagged(&self, k: usize, dist: f64) -> bool {
        let rstar = self.radii[k];
        if dist < rstar * (1.0 - 1e-9) {
            true
        } else if dist > rstar * (1.0 + 1e-9) {
            false
        } else {
            let (i, j) = (self.flagged[k].0 as usize, self.flagged[k].1 as usize);
            self.oracle.uniform_of(i, j, self.epoch, true) < self.oracle.prob(dist, i, j)
        }
    }
}

/// Largest cloud for which a full threshold table is built.
pub const DEFAULT_TABLE_LIMIT: usize = 4096;

/// Threshold radii of every pair in one epoch.
#[derive(Clone, Debug)]
pub struct ThresholdTable {
    pub epoch: u32,
    n: usize,
    uniforms: Vec<f64>,
    radii: Vec<f64>,
}

impl ThresholdTable {
    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        // row-major strict upper triangle
        a * (2 * self.n - a - 1) / 2 + (b - a - 1)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn radius(&self, i: usize, j: usize) -> f64 {
        self.radii[self.slot(i, j)]
    }

    /// Edge lookup. Decided by distance comparison except within a
    /// rounding band around the threshold, where the uniform is compared
    /// with the kernel directly.
    pub fn has_edge(&self, orc: &EdgeOracle, snap: &Snapshot, i: usize, j: usize) -> Result<bool> {
        orc.check_pair(i, j)?;
        if snap.epoch != self.epoch {
            return invalid("snapshot lies in a different epoch");
        }
        let s = self.slot(i, j);
        let (r, rstar) = (snap.dist(i, j), self.radii[s]);
        Ok(if r < rstar * (1.0 - 1e-9) {
            true
        } else if r > rstar * (1.0 + 1e-9) {
            false
        } else {
            self.uniforms[s] < orc.prob(r, i, j)
        })
    }
}

/// Full per-pair threshold table for the snapshot's epoch.
pub fn epoch_thresholds(orc: &EdgeOracle, snap: &Snapshot, limit: usize) -> Result<ThresholdTable> {
    orc.check_snapshot(snap)?;
    let n = orc.len();
    if n > limit {
        return Err(Error::ResourceLimit {
            what: "threshold table vertices",
            requested: n,
            limit,
            advice: "use the cell-list component search instead",
        });
    }
    let edges = orc.epoch_edges(snap.epoch);
    let mut uniforms = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    let mut radii = Vec::with_capacity(uniforms.capacity());
    for i in 0..n {
        for j in i + 1..n {
            let u = edges.pair_uniform(i, j);
            uniforms.push(u);
            radii.push(orc.threshold(u, i, j));
        }
    }
    Ok(ThresholdTable {
        epoch: snap.epoch,
        n,
        uniforms,
        radii,
    })
}
