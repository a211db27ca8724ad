//! Survival curve of the percolation-time proxy and its tail fits.

use mobgraph::dynamics::uniform_grid;
use mobgraph::propagation::{run_percolation_proxy, survival_curve};
use mobgraph::stats::fit_tails;
use serde::Serialize;

use super::{stream, Ctx};
use crate::error::{CliError, Result};

#[derive(Serialize)]
struct TraceRow {
    replica: usize,
    time: f64,
    origin_comp: u32,
    giant: u32,
    #[serde(rename = "T_perc_proxy")]
    t_perc: Option<f64>,
}

#[derive(Serialize)]
struct SurvivalRow {
    time: f64,
    survival: f64,
}

#[derive(Serialize)]
struct FitRow {
    model: &'static str,
    /// `P = exp(-a t^b)` or `P = c t^-k`.
    param_1: f64,
    param_2: f64,
    residual: f64,
    points: usize,
}

#[derive(Serialize)]
struct SlopeRow {
    loglog_slope: f64,
    points: usize,
}

pub fn run(ctx: &Ctx) -> Result<()> {
    let cfg = &ctx.cfg;
    let dom = cfg.domain()?;
    if dom.is_torus() {
        return Err(CliError::Config("perc-tail needs a box domain".into()));
    }
    ctx.check_size(cfg.lambda, &dom)?;
    let grid = uniform_grid(cfg.dt_obs, cfg.t_max)?;
    let tail = ctx.tail(&cfg.kernel_params(), cfg.lambda, &dom);
    let traces = ctx.replicate(cfg.replicas, |r| {
        let seed = ctx.seed(stream::PERC, 0, r);
        let orc = ctx.oracle(ctx.cloud(&dom, true, seed)?, seed, tail)?;
        Ok(run_percolation_proxy(&orc, &grid, cfg.perc.rho)?)
    })?;
    let mut rows = Vec::new();
    for (r, t) in traces.iter().enumerate() {
        for k in 0..t.times.len() {
            rows.push(TraceRow {
                replica: r,
                time: t.times[k],
                origin_comp: t.origin_component[k],
                giant: t.giant[k],
                t_perc: t.t_perc,
            });
        }
    }
    ctx.out.write_rows("perc_traces.csv", &rows)?;

    let samples: Vec<Option<f64>> = traces.iter().map(|t| t.t_perc).collect();
    let surv = survival_curve(&samples, &grid);
    let surv_rows: Vec<SurvivalRow> = grid
        .iter()
        .zip(&surv)
        .map(|(&time, &survival)| SurvivalRow { time, survival })
        .collect();
    ctx.out.write_rows("perc_survival.csv", &surv_rows)?;

    match fit_tails(&grid, &surv) {
        Ok(f) => {
            ctx.out.write_rows(
                "perc_fits.csv",
                &[
                    FitRow {
                        model: "stretched_exponential",
                        param_1: f.stretched_a,
                        param_2: f.stretched_b,
                        residual: f.stretched_residual,
                        points: f.points,
                    },
                    FitRow {
                        model: "power_law",
                        param_1: f.power_c,
                        param_2: f.power_k,
                        residual: f.power_residual,
                        points: f.points,
                    },
                ],
            )?;
            ctx.out.write_rows(
                "perc_loglog.csv",
                &[SlopeRow {
                    loglog_slope: f.loglog_slope,
                    points: f.points,
                }],
            )
        }
        Err(e) => {
            log::warn!("no tail fit: {e}");
            ctx.out.write_rows::<FitRow>("perc_fits.csv", &[])?;
            ctx.out.write_rows::<SlopeRow>("perc_loglog.csv", &[])
        }
    }
}
