//! Marked Poisson point processes, the Palm origin vertex, mark layers and
//! independent thinning.

use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geometry::{Domain, Position};
use crate::rng::{tag, Key};

/// A vertex: stable identity, time-zero location and its (fixed) mark.
///
/// The Brownian path of a vertex is keyed by the run seed and `id`, so a
/// vertex moves identically in a cloud and in any thinning of it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Vertex {
    pub id: u32,
    pub pos: Position,
    pub mark: f64,
}

/// A realisation of the vertex process. Vertices are sorted by strictly
/// increasing id; ids need not be contiguous after thinning.
#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    pub domain: Domain,
    pub vertices: Vec<Vertex>,
    pub intensity: f64,
    /// Vertex id 0 is the Palm origin vertex.
    pub palm: bool,
    pub seed: u64,
}

impl PointCloud {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn index_of(&self, id: u32) -> Option<usize> {
        self.vertices.binary_search_by_key(&id, |v| v.id).ok()
    }

    /// Index of the Palm origin vertex, if present.
    pub fn origin_index(&self) -> Option<usize> {
        if self.palm {
            self.index_of(0)
        } else {
            None
        }
    }

    pub fn marks(&self) -> impl Iterator<Item = f64> + '_ {
        self.vertices.iter().map(|v| v.mark)
    }

    /// Replaces the origin vertex's mark, e.g. to study a weak origin.
    pub fn pin_origin_mark(&mut self, mark: f64) -> Result<()> {
        if !(mark > 0.0 && mark < 1.0) {
            return invalid(format!("mark must lie in (0,1), got {mark}"));
        }
        match self.origin_index() {
            Some(i) => {
                self.vertices[i].mark = mark;
                Ok(())
            }
            None => invalid("cloud has no origin vertex"),
        }
    }

    /// Builds a cloud from explicit vertices (sorted by id on the way in).
    pub fn from_vertices(
        domain: Domain,
        intensity: f64,
        palm: bool,
        mut vertices: Vec<Vertex>,
    ) -> Result<Self> {
        vertices.sort_by_key(|v| v.id);
        if vertices.windows(2).any(|w| w[0].id == w[1].id) {
            return invalid("duplicate vertex id");
        }
        for v in &vertices {
            if !(v.mark > 0.0 && v.mark < 1.0) {
                return invalid(format!("vertex {} has mark {} outside (0,1)", v.id, v.mark));
            }
            if !domain.contains(&v.pos) {
                return invalid(format!("vertex {} lies outside the domain", v.id));
            }
        }
        if palm && vertices.first().map(|v| v.id) != Some(0) {
            return invalid("palm cloud must contain vertex 0");
        }
        Ok(PointCloud {
            domain,
            vertices,
            intensity,
            palm,
            seed: 0,
        })
    }
}

/// Samples a Poisson process of intensity `lambda` on `dom` with uniform
/// marks. With `palm`, an extra vertex with id 0 and a uniform mark is
/// placed at `dom.origin()`.
pub fn sample_ppp(dom: &Domain, lambda: f64, palm: bool, seed: u64) -> Result<PointCloud> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return invalid(format!("intensity must be positive, got {lambda}"));
    }
    let mean = lambda * dom.volume();
    if !(mean.is_finite() && mean > 0.0) {
        return invalid("domain volume must be positive");
    }
    let key = Key::from_seed(seed);
    let mut rng = key.stream([0, tag::SAMPLE, 0]);
    let count = Poisson::new(mean)
        .map_err(|e| crate::Error::InvalidInput(e.to_string()))?
        .sample(&mut rng) as usize;
    if count >= u32::MAX as usize - 1 {
        return invalid("too many vertices");
    }

    let mut vertices = Vec::with_capacity(count + usize::from(palm));
    if palm {
        vertices.push(Vertex {
            id: 0,
            pos: dom.origin(),
            mark: key.uniform([0, tag::PALM_MARK, 0, 0]),
        });
    }
    let first_id = u32::from(palm);
    for k in 0..count as u32 {
        let pos = (0..dom.dim)
            .map(|_| dom.wrap_coord(dom.side * rng.next_open01()))
            .collect();
        vertices.push(Vertex {
            id: first_id + k,
            pos: Position(pos),
            mark: rng.next_open01(),
        });
    }
    Ok(PointCloud {
        domain: *dom,
        vertices,
        intensity: lambda,
        palm,
        seed,
    })
}

/// Where the Palm origin goes when a cloud is thinned.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum OriginSide {
    Sprinkle,
    #[default]
    Bulk,
}

/// Splits a cloud into independent parts of intensity `eps*lambda` (the
/// sprinkling part, returned first) and `(1-eps)*lambda`.
pub fn thin(
    cloud: &PointCloud,
    eps: f64,
    seed: u64,
    origin: OriginSide,
) -> Result<(PointCloud, PointCloud)> {
    if !(eps > 0.0 && eps < 1.0) {
        return invalid(format!("thinning fraction must lie in (0,1), got {eps}"));
    }
    let key = Key::from_seed(seed);
    let (mut sprinkle, mut bulk) = (Vec::new(), Vec::new());
    for v in &cloud.vertices {
        let to_sprinkle = if cloud.palm && v.id == 0 {
            origin == OriginSide::Sprinkle
        } else {
            key.uniform([v.id, tag::THIN, 0, 0]) < eps
        };
        if to_sprinkle {
            sprinkle.push(v.clone());
        } else {
            bulk.push(v.clone());
        }
    }
    let part = |vertices: Vec<Vertex>, frac: f64, has_origin: bool| PointCloud {
        domain: cloud.domain,
        vertices,
        intensity: cloud.intensity * frac,
        palm: cloud.palm && has_origin,
        seed: cloud.seed,
    };
    Ok((
        part(sprinkle, eps, origin == OriginSide::Sprinkle),
        part(bulk, 1.0 - eps, origin == OriginSide::Bulk),
    ))
}

/// The mark layers `I_{-1} = (1/2, 1)` and
/// `I_k = (e^{-(k+1) theta d} / 2, e^{-k theta d} / 2)` for `0 <= k <= k_max`.
#[derive(Clone, Debug, PartialEq)]
pub struct MarkLayers {
    pub theta: f64,
    pub eps_theta: f64,
    pub t_scale: f64,
    pub dim: usize,
    /// `floor(eps_theta * ln(t_scale) / d)`; `-1` when only `I_{-1}` exists.
    pub k_max: i32,
}

impl MarkLayers {
    pub fn new(theta: f64, eps_theta: f64, t_scale: f64, dim: usize) -> Result<Self> {
        if !(theta > 0.0 && theta.is_finite()) || !(eps_theta > 0.0) || !(t_scale > 0.0) {
            return invalid("mark layers need positive theta, eps_theta and scale");
        }
        if dim == 0 {
            return invalid("dimension must be positive");
        }
        let k_max = (eps_theta * t_scale.ln() / dim as f64).floor().max(-1.0) as i32;
        Ok(MarkLayers {
            theta,
            eps_theta,
            t_scale,
            dim,
            k_max,
        })
    }

    /// Open interval `(lower, upper)` of layer `k >= -1`.
    pub fn interval(&self, k: i32) -> (f64, f64) {
        if k < 0 {
            return (0.5, 1.0);
        }
        let td = self.theta * self.dim as f64;
        (
            0.5 * (-(f64::from(k) + 1.0) * td).exp(),
            0.5 * (-f64::from(k) * td).exp(),
        )
    }

    pub fn width(&self, k: i32) -> f64 {
        let (lo, hi) = self.interval(k);
        hi - lo
    }

    /// Layers in order `-1, 0, ..., k_max`.
    pub fn layers(&self) -> impl Iterator<Item = i32> {
        -1..=self.k_max
    }

    /// Marks below this value belong to no layer.
    pub fn floor_mark(&self) -> f64 {
        self.interval(self.k_max).0
    }
}

/// The layer containing `u`, or `None` below the bottom layer or exactly on
/// an interval boundary.
pub fn layer_of(u: f64, layers: &MarkLayers) -> Option<i32> {
    if u > 0.5 && u < 1.0 {
        return Some(-1);
    }
    if !(u > 0.0 && u < 0.5) {
        if u == 0.5 {
            log::debug!("mark {u} sits on a layer boundary");
        }
        return None;
    }
    let td = layers.theta * layers.dim as f64;
    let k = ((-(2.0 * u).ln()) / td).floor() as i64;
    // floating point can put u one layer off near a boundary; check both sides
    for cand in [k - 1, k, k + 1] {
        if cand < 0 || cand > i64::from(layers.k_max) {
            continue;
        }
        let (lo, hi) = layers.interval(cand as i32);
        if u > lo && u < hi {
            return Some(cand as i32);
        }
        if u == lo || u == hi {
            log::debug!("mark {u} sits on a layer boundary");
            return None;
        }
    }
    None
}

/// Counts points per cell of a regular grid with `cells` cells per axis
/// covering `[0, side)^d`. Points outside are ignored. Cells are ordered
/// with the first axis varying fastest.
pub fn subcube_counts<'a, I>(points: I, dom: &Domain, cells: usize) -> Vec<u64>
where
    I: IntoIterator<Item = &'a [f64]>,
{
    let total = cells.pow(dom.dim as u32);
    let mut counts = vec![0u64; total];
    let w = dom.side / cells as f64;
    'points: for p in points {
        let mut idx = 0usize;
        let mut stride = 1usize;
        for &x in p {
            if !(0.0..dom.side).contains(&x) {
                continue 'points;
            }
            let c = ((x / w) as usize).min(cells - 1);
            idx += c * stride;
            stride *= cells;
        }
        counts[idx] += 1;
    }
    counts
}
