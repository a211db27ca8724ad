pub mod broadcast;
pub mod convergence;
pub mod diagnose;
pub mod evolve;
pub mod perc;
pub mod sample;

use std::sync::Arc;

use mobgraph::dynamics::{auto_tail_radius, EdgeOracle, TailRadius};
use mobgraph::geometry::Domain;
use mobgraph::kernels::KernelParams;
use mobgraph::pointprocess::{sample_ppp, PointCloud};
use mobgraph::rng::derive_seed;
use rayon::prelude::*;
use rayon::ThreadPool;

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::output::Output;

/// Seed streams, one per experiment family, so that subcommands never share
/// replica seeds.
pub mod stream {
    pub const SAMPLE: u64 = 1;
    pub const EVOLVE: u64 = 2;
    pub const BROADCAST: u64 = 3;
    pub const PERC: u64 = 4;
    pub const DENSITY: u64 = 5;
    pub const SPREAD: u64 = 6;
    pub const CONNECTORS: u64 = 7;
    pub const MEMBERSHIP: u64 = 8;
    pub const CONVERGENCE: u64 = 9;
}

pub struct Ctx {
    pub cfg: RunConfig,
    pub out: Output,
    pool: ThreadPool,
}

impl Ctx {
    pub fn new(cfg: RunConfig, out: Output, workers: usize) -> Result<Self> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build()?;
        Ok(Ctx { cfg, out, pool })
    }

    /// Runs `f` for replicas `0..n` on the pool; results come back in
    /// replica order whatever the worker count.
    pub fn replicate<T, F>(&self, n: usize, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(usize) -> Result<T> + Sync + Send,
    {
        self.pool.install(|| (0..n).into_par_iter().map(f).collect())
    }

    /// Seed of replica `r` in experiment stream `s`, optionally split
    /// further by `sub` (e.g. a volume index).
    pub fn seed(&self, s: u64, sub: u64, r: usize) -> u64 {
        derive_seed(derive_seed(derive_seed(self.cfg.seed, s), sub), r as u64)
    }

    /// Errors out before sampling a cloud that is too large.
    pub fn check_size(&self, lambda: f64, dom: &Domain) -> Result<()> {
        let expected = lambda * dom.volume();
        if expected > self.cfg.max_vertices as f64 {
            return Err(CliError::Engine(mobgraph::Error::ResourceLimit {
                what: "expected vertex count",
                requested: expected as usize,
                limit: self.cfg.max_vertices,
                advice: "shrink the domain or raise max_vertices",
            }));
        }
        Ok(())
    }

    /// Tail radius for all replicas on `dom`, fixed up front so that it does
    /// not depend on the sampled vertex count.
    pub fn tail(&self, kp: &KernelParams, lambda: f64, dom: &Domain) -> TailRadius {
        let r = self
            .cfg
            .tail_radius
            .unwrap_or_else(|| auto_tail_radius(kp, lambda, dom, (lambda * dom.volume()).ceil() as usize));
        TailRadius::Fixed(r)
    }

    /// A cloud on `dom` honouring `palm` and `origin_mark`.
    pub fn cloud(&self, dom: &Domain, palm: bool, seed: u64) -> Result<PointCloud> {
        let mut c = sample_ppp(dom, self.cfg.lambda, palm, seed)?;
        if let (true, Some(m)) = (palm, self.cfg.origin_mark) {
            c.pin_origin_mark(m)?;
        }
        Ok(c)
    }

    pub fn oracle(&self, cloud: PointCloud, seed: u64, tail: TailRadius) -> Result<EdgeOracle> {
        Ok(EdgeOracle::new(seed, self.cfg.kernel_params(), Arc::new(cloud), tail)?)
    }
}
