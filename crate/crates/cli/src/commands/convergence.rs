//! Broadcast time under grid refinement on fixed seeds.

use mobgraph::dynamics::uniform_grid;
use mobgraph::propagation::run_broadcast;
use serde::Serialize;

use super::broadcast::median_time;
use super::{stream, Ctx};
use crate::error::{CliError, Result};

#[derive(Serialize)]
struct Row {
    replica: usize,
    dt: f64,
    #[serde(rename = "T_bc")]
    t_bc: Option<f64>,
    /// No larger than at the previous, coarser step.
    monotone: bool,
}

#[derive(Serialize)]
struct SummaryRow {
    dt: f64,
    replicas: usize,
    median_t_bc: f64,
    /// Relative change of the median against the previous step.
    relative_change: Option<f64>,
}

pub fn run(ctx: &Ctx) -> Result<()> {
    let cfg = &ctx.cfg;
    let dom = cfg.domain()?;
    if !dom.is_torus() {
        return Err(CliError::Config("convergence runs broadcast and needs a torus domain".into()));
    }
    ctx.check_size(cfg.lambda, &dom)?;
    let tail = ctx.tail(&cfg.kernel_params(), cfg.lambda, &dom);
    let dts = &cfg.convergence.dts;
    let grids = dts
        .iter()
        .map(|&dt| uniform_grid(dt, cfg.t_max))
        .collect::<mobgraph::Result<Vec<_>>>()?;
    let per_replica = ctx.replicate(cfg.replicas, |r| {
        let seed = ctx.seed(stream::CONVERGENCE, 0, r);
        let orc = ctx.oracle(ctx.cloud(&dom, true, seed)?, seed, tail)?;
        grids
            .iter()
            .map(|g| Ok(run_broadcast(&orc, g)?.t_bc))
            .collect::<Result<Vec<_>>>()
    })?;
    let mut rows = Vec::new();
    for (r, ts) in per_replica.iter().enumerate() {
        for (k, (&dt, &t)) in dts.iter().zip(ts).enumerate() {
            let monotone = k == 0 || le(t, ts[k - 1]);
            if !monotone {
                log::warn!("replica {r}: T_bc grew from {:?} to {t:?} at dt={dt}", ts[k - 1]);
            }
            rows.push(Row {
                replica: r,
                dt,
                t_bc: t,
                monotone,
            });
        }
    }
    let mut summary: Vec<SummaryRow> = Vec::new();
    for (k, &dt) in dts.iter().enumerate() {
        let ts: Vec<Option<f64>> = per_replica.iter().map(|v| v[k]).collect();
        let med = median_time(&ts);
        let relative_change = summary
            .last()
            .filter(|p| p.median_t_bc.is_finite() && p.median_t_bc > 0.0 && med.is_finite())
            .map(|p| (p.median_t_bc - med).abs() / p.median_t_bc);
        summary.push(SummaryRow {
            dt,
            replicas: ts.len(),
            median_t_bc: med,
            relative_change,
        });
    }
    ctx.out.write_rows("convergence.csv", &rows)?;
    ctx.out.write_rows("convergence_summary.csv", &summary)
}

/// `a <= b` with `None` as infinity.
fn le(a: Option<f64>, b: Option<f64>) -> bool {
    match (a, b) {
        (_, None) => true,
        (None, Some(_)) => false,
        (Some(x), Some(y)) => x <= y,
    }
}
