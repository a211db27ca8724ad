//! Broadcast time against torus volume.

use mobgraph::dynamics::uniform_grid;
use mobgraph::geometry::Domain;
use mobgraph::propagation::{run_broadcast, BroadcastTrace};
use mobgraph::stats::median;
use serde::Serialize;

use super::{stream, Ctx};
use crate::error::Result;

#[derive(Serialize)]
struct ReplicaRow {
    volume: f64,
    replica: usize,
    seed: u64,
    #[serde(rename = "N")]
    n: u32,
    #[serde(rename = "T_bc")]
    t_bc: Option<f64>,
}

#[derive(Serialize)]
struct TraceRow {
    volume: f64,
    replica: usize,
    time: f64,
    informed: u32,
    #[serde(rename = "N")]
    n: u32,
    #[serde(rename = "T_bc")]
    t_bc: Option<f64>,
}

#[derive(Serialize)]
pub struct SummaryRow {
    pub volume: f64,
    pub replicas: usize,
    pub reached: usize,
    /// Unreached replicas count as infinite.
    pub median_t_bc: f64,
    pub normalized: f64,
    pub over_n_0_2: f64,
}

/// Median of optional times with `None` above everything.
pub fn median_time(ts: &[Option<f64>]) -> f64 {
    let xs: Vec<f64> = ts.iter().map(|t| t.unwrap_or(f64::INFINITY)).collect();
    median(&xs)
}

/// `ln n * (ln ln n)^eps`.
pub fn polylog(n: f64, eps: f64) -> f64 {
    n.ln() * n.ln().ln().powf(eps)
}

pub fn run(ctx: &Ctx) -> Result<()> {
    let cfg = &ctx.cfg;
    let kp = cfg.kernel_params();
    let grid = uniform_grid(cfg.dt_obs, cfg.t_max)?;
    let mut replica_rows = Vec::new();
    let mut trace_rows = Vec::new();
    let mut summary = Vec::new();
    for (vi, &volume) in cfg.broadcast.volumes.iter().enumerate() {
        let dom = Domain::torus(cfg.domain.dim, volume)?;
        ctx.check_size(cfg.lambda, &dom)?;
        let tail = ctx.tail(&kp, cfg.lambda, &dom);
        let reps = cfg
            .broadcast
            .replicas_per_volume
            .as_ref()
            .map_or(cfg.replicas, |r| r[vi]);
        log::info!("volume {volume}: {reps} replicas");
        let traces: Vec<(u64, BroadcastTrace)> = ctx.replicate(reps, |r| {
            let seed = ctx.seed(stream::BROADCAST, vi as u64, r);
            let orc = ctx.oracle(ctx.cloud(&dom, true, seed)?, seed, tail)?;
            Ok((seed, run_broadcast(&orc, &grid)?))
        })?;
        for (r, (seed, t)) in traces.iter().enumerate() {
            replica_rows.push(ReplicaRow {
                volume,
                replica: r,
                seed: *seed,
                n: t.n,
                t_bc: t.t_bc,
            });
            for (&time, &informed) in t.times.iter().zip(&t.informed) {
                trace_rows.push(TraceRow {
                    volume,
                    replica: r,
                    time,
                    informed,
                    n: t.n,
                    t_bc: t.t_bc,
                });
            }
        }
        let times: Vec<Option<f64>> = traces.iter().map(|(_, t)| t.t_bc).collect();
        let med = median_time(&times);
        summary.push(SummaryRow {
            volume,
            replicas: reps,
            reached: times.iter().filter(|t| t.is_some()).count(),
            median_t_bc: med,
            normalized: med / polylog(volume, cfg.broadcast.epsilon),
            over_n_0_2: med / volume.powf(0.2),
        });
    }
    ctx.out.write_rows("broadcast_replicas.csv", &replica_rows)?;
    ctx.out.write_rows("broadcast_traces.csv", &trace_rows)?;
    ctx.out.write_rows("broadcast_summary.csv", &summary)
}
