//! Diagnostics that follow the steps of the connectivity arguments: density
//! of mark layers, evenly spread subgraphs, two-connector counts, membership
//! of probes and Chernoff bounds.

mod chernoff;
mod connectors;
mod density;
mod membership;
mod spread;

pub use chernoff::{chernoff_binomial, chernoff_poisson};
pub use connectors::{connector_bracket, two_connector_count, ConnectorCount};
pub use density::{density_check, DensityReport};
pub use membership::{component_of, membership_single, membership_two_time, Estimate};
pub use spread::{build_spread_subgraph, verify_spread, GoodBox, Link, SpreadParams, SpreadSubgraph};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geometry::Domain;

/// An axis-parallel cube `[corner, corner + side)^d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cube {
    pub corner: Vec<f64>,
    pub side: f64,
}

impl Cube {
    pub fn new(corner: Vec<f64>, side: f64) -> Result<Self> {
        if corner.is_empty() {
            return invalid("cube needs at least one dimension");
        }
        if !(side > 0.0 && side.is_finite()) || corner.iter().any(|c| !c.is_finite()) {
            return invalid(format!("cube side must be positive, got {side}"));
        }
        Ok(Cube { corner, side })
    }

    /// The cube of the given side centred in the domain.
    pub fn centred(dom: &Domain, side: f64) -> Result<Self> {
        let c = (dom.side - side) / 2.0;
        let cube = Cube::new(vec![c; dom.dim], side)?;
        cube.check_inside(dom)?;
        Ok(cube)
    }

    pub fn dim(&self) -> usize {
        self.corner.len()
    }

    pub fn check_inside(&self, dom: &Domain) -> Result<()> {
        if self.dim() != dom.dim {
            return invalid("cube and domain dimensions differ");
        }
        let tol = 1e-9 * dom.side;
        if self.corner.iter().any(|&c| c < -tol || c + self.side > dom.side + tol) {
            return invalid(format!("cube of side {} does not fit in the domain", self.side));
        }
        Ok(())
    }

    /// Cell of `p` in a grid of `per_side^d` cells of side `cell`, first axis
    /// fastest; `None` outside the grid.
    pub fn cell_of(&self, p: &[f64], cell: f64, per_side: usize) -> Option<usize> {
        let mut idx = 0usize;
        let mut stride = 1usize;
        for (x, c) in p.iter().zip(&self.corner) {
            let k = ((x - c) / cell).floor();
            if !(k >= 0.0 && k < per_side as f64) {
                return None;
            }
            idx += k as usize * stride;
            stride *= per_side;
        }
        Some(idx)
    }
}
