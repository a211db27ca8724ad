//! Domains, the metric and Brownian displacement.

use std::ops::Deref;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainKind {
    /// Flat torus, coordinates wrap into `[0, side)`.
    Torus,
    /// Finite window standing in for the whole space. Nothing wraps and
    /// vertices are free to wander outside `[0, side]`.
    Box,
}

/// The space vertices live in.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub kind: DomainKind,
    pub dim: usize,
    pub side: f64,
}

impl Domain {
    /// Torus of the given volume; the side length is `volume^(1/dim)`.
    pub fn torus(dim: usize, volume: f64) -> Result<Self> {
        if dim == 0 {
            return invalid("dimension must be positive");
        }
        if !(volume.is_finite() && volume > 0.0) {
            return invalid(format!("torus volume must be positive, got {volume}"));
        }
        Ok(Domain {
            kind: DomainKind::Torus,
            dim,
            side: volume.powf(1.0 / dim as f64),
        })
    }

    pub fn cube(dim: usize, side: f64) -> Result<Self> {
        if dim == 0 {
            return invalid("dimension must be positive");
        }
        if !(side.is_finite() && side > 0.0) {
            return invalid(format!("box side must be positive, got {side}"));
        }
        Ok(Domain {
            kind: DomainKind::Box,
            dim,
            side,
        })
    }

    pub fn volume(&self) -> f64 {
        self.side.powi(self.dim as i32)
    }

    pub fn is_torus(&self) -> bool {
        self.kind == DomainKind::Torus
    }

    /// Where the Palm vertex is placed: the coordinate origin on the torus,
    /// the centre of the window in box mode.
    pub fn origin(&self) -> Position {
        match self.kind {
            DomainKind::Torus => Position(vec![0.0; self.dim]),
            DomainKind::Box => Position(vec![self.side / 2.0; self.dim]),
        }
    }

    /// Largest possible distance between two valid positions.
    pub fn diameter(&self) -> f64 {
        let per_axis = match self.kind {
            DomainKind::Torus => self.side / 2.0,
            DomainKind::Box => self.side,
        };
        per_axis * (self.dim as f64).sqrt()
    }

    #[inline]
    pub fn wrap_coord(&self, x: f64) -> f64 {
        match self.kind {
            DomainKind::Torus => {
                let r = x.rem_euclid(self.side);
                // rem_euclid rounds tiny negative inputs up to `side`
                if r >= self.side {
                    0.0
                } else {
                    r
                }
            }
            DomainKind::Box => x,
        }
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim
            && p.iter().all(|&x| match self.kind {
                DomainKind::Torus => (0.0..self.side).contains(&x),
                DomainKind::Box => x.is_finite(),
            })
    }

    /// Squared distance without dimension checks. Hot path.
    #[inline]
    pub fn dist2(&self, a: &[f64], b: &[f64]) -> f64 {
        let mut s = 0.0;
        match self.kind {
            DomainKind::Torus => {
                for (x, y) in a.iter().zip(b) {
                    let mut d = (x - y).abs();
                    if d > self.side - d {
                        d = self.side - d;
                    }
                    s += d * d;
                }
            }
            DomainKind::Box => {
                for (x, y) in a.iter().zip(b) {
                    let d = x - y;
                    s += d * d;
                }
            }
        }
        s
    }
}

/// A point of the domain, in length units of the domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Position(pub Vec<f64>);

impl Deref for Position {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for Position {
    fn from(v: Vec<f64>) -> Self {
        Position(v)
    }
}

/// Distance between two positions: Euclidean in box mode, minimum-image
/// Euclidean on the torus.
pub fn distance(a: &[f64], b: &[f64], dom: &Domain) -> Result<f64> {
    if a.len() != dom.dim || b.len() != dom.dim {
        return invalid(format!(
            "dimension mismatch: {} and {} in a {}-dimensional domain",
            a.len(),
            b.len(),
            dom.dim
        ));
    }
    Ok(dom.dist2(a, b).sqrt())
}

/// Adds an independent `Normal(0, dt)` increment to every coordinate.
pub fn brownian_step<R: Rng + ?Sized>(
    p: &[f64],
    dt: f64,
    dom: &Domain,
    rng: &mut R,
) -> Result<Position> {
    if !(dt >= 0.0 && dt.is_finite()) {
        return invalid(format!("time step must be nonnegative, got {dt}"));
    }
    if p.len() != dom.dim {
        return invalid("dimension mismatch");
    }
    let sd = dt.sqrt();
    Ok(Position(
        p.iter()
            .map(|&x| {
                let z: f64 = rng.sample(StandardNormal);
                dom.wrap_coord(x + sd * z)
            })
            .collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Key;
    use proptest::prelude::*;

    #[test]
    fn torus_distance_wraps() {
        let dom = Domain::torus(2, 100.0).unwrap();
        let d = distance(&[1.0, 1.0], &[9.0, 9.0], &dom).unwrap();
        assert!((d - 8f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn box_distance_does_not_wrap() {
        let dom = Domain::cube(1, 10.0).unwrap();
        assert_eq!(distance(&[1.0], &[9.0], &dom).unwrap(), 8.0);
        assert_eq!(distance(&[3.5], &[3.5], &dom).unwrap(), 0.0);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let dom = Domain::torus(2, 100.0).unwrap();
        assert!(distance(&[1.0], &[1.0, 2.0], &dom).is_err());
    }

    #[test]
    fn zero_step_keeps_position() {
        let dom = Domain::torus(3, 1000.0).unwrap();
        let mut s = Key::from_seed(1).stream([0, 0, 0]);
        let p = [1.0, 2.0, 3.0];
        assert_eq!(brownian_step(&p, 0.0, &dom, &mut s).unwrap().0, p.to_vec());
        assert!(brownian_step(&p, -1.0, &dom, &mut s).is_err());
    }

    #[test]
    fn wrap_is_modular() {
        let dom = Domain::torus(1, 10.0).unwrap();
        assert!((dom.wrap_coord(9.9 + 0.3) - 0.2).abs() < 1e-12);
        assert_eq!(dom.wrap_coord(-1e-18), 0.0);
    }

    #[test]
    fn unit_step_variance() {
        let dom = Domain::cube(1, 10.0).unwrap();
        let mut s = Key::from_seed(99).stream([1, 1, 1]);
        let n = 100_000;
        let draws: Vec<f64> = (0..n)
            .map(|_| brownian_step(&[0.0], 1.0, &dom, &mut s).unwrap()[0])
            .collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((0.97..=1.03).contains(&var), "variance {var}");
    }

    proptest! {
        #[test]
        fn torus_metric_is_shift_invariant(
            a in prop::collection::vec(0.0..10.0f64, 2),
            b in prop::collection::vec(0.0..10.0f64, 2),
            c in prop::collection::vec(0.0..10.0f64, 2),
            s in prop::collection::vec(-30.0..30.0f64, 2),
        ) {
            let dom = Domain::torus(2, 100.0).unwrap();
            let shift = |p: &[f64]| -> Vec<f64> {
                p.iter().zip(&s).map(|(x, t)| dom.wrap_coord(x + t)).collect()
            };
            let d_ab = distance(&a, &b, &dom).unwrap();
            let d_shift = distance(&shift(&a), &shift(&b), &dom).unwrap();
            prop_assert!((d_ab - d_shift).abs() < 1e-9);
            prop_assert!((d_ab - distance(&b, &a, &dom).unwrap()).abs() == 0.0);
            let d_ac = distance(&a, &c, &dom).unwrap();
            let d_cb = distance(&c, &b, &dom).unwrap();
            prop_assert!(d_ab <= d_ac + d_cb + 1e-12);
        }

        #[test]
        fn wrapped_coordinates_stay_inside(x in -1e6..1e6f64) {
            let dom = Domain::torus(1, 7.5).unwrap();
            let w = dom.wrap_coord(x);
            prop_assert!((0.0..dom.side).contains(&w));
        }
    }
}
