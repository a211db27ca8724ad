//! Component statistics along the observation grid.

use mobgraph::dynamics::{evolve, uniform_grid};
use mobgraph::graph::{components_fast_with, degrees_with, stats_from_degrees};
use serde::Serialize;

use super::{stream, Ctx};
use crate::error::Result;

#[derive(Serialize)]
struct Row {
    replica: usize,
    time: f64,
    #[serde(rename = "N")]
    n: usize,
    num_components: usize,
    largest: u32,
    second_largest: u32,
    mean_degree: f64,
}

pub fn run(ctx: &Ctx) -> Result<()> {
    let cfg = &ctx.cfg;
    let dom = cfg.domain()?;
    ctx.check_size(cfg.lambda, &dom)?;
    let grid = uniform_grid(cfg.dt_obs, cfg.t_max)?;
    let tail = ctx.tail(&cfg.kernel_params(), cfg.lambda, &dom);
    let per_replica = ctx.replicate(cfg.replicas, |r| {
        let seed = ctx.seed(stream::EVOLVE, 0, r);
        let orc = ctx.oracle(ctx.cloud(&dom, cfg.palm, seed)?, seed, tail)?;
        let mut rows = Vec::with_capacity(grid.len());
        let mut edges = None;
        for snap in evolve(orc.cloud.clone(), &grid, seed)? {
            if edges.as_ref().map(|e: &mobgraph::dynamics::EpochEdges<'_>| e.epoch) != Some(snap.epoch) {
                edges = Some(orc.epoch_edges(snap.epoch));
            }
            let e = edges.as_ref().expect("set above");
            let labels = components_fast_with(&snap, e, None)?.labels;
            let deg = degrees_with(&snap, e)?;
            rows.push(Row {
                replica: r,
                time: snap.time,
                n: snap.len(),
                num_components: labels.num_components,
                largest: labels.largest_size(),
                second_largest: labels.second_largest_size(),
                mean_degree: stats_from_degrees(&deg).mean,
            });
        }
        Ok(rows)
    })?;
    ctx.out.write_rows("components.csv", &per_replica.into_iter().flatten().collect::<Vec<_>>())
}
