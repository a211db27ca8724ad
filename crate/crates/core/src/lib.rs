//! Simulation of mobile geometric scale-free random graphs: marked Poisson
//! vertices moving as Brownian motions, with edges resampled every unit-time
//! epoch. The guide in `book/` walks through the modules.

// `!(x > 0.0)` style guards are meant to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod graph;
pub mod io;
pub mod kernels;
pub mod pointprocess;
pub mod propagation;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/dynamics.md")]
    mod dynamics {}
    #[doc = include_str!("../../../book/src/components.md")]
    mod components {}
    #[doc = include_str!("../../../book/src/propagation.md")]
    mod propagation {}
    #[doc = include_str!("../../../book/src/diagnostics.md")]
    mod diagnostics {}
    #[doc = include_str!("../../../book/src/reproducibility.md")]
    mod reproducibility {}
}
