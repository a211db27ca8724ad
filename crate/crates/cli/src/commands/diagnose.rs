//! Proof-derived diagnostics: density, spread subgraphs, connector counts
//! and membership.

use std::sync::Arc;

use mobgraph::analysis::{
    build_spread_subgraph, density_check, membership_single, membership_two_time, two_connector_count,
    verify_spread, Cube, DensityReport, Estimate, SpreadParams,
};
use mobgraph::dynamics::{auto_tail_radius, evolve, EdgeOracle, Motion, Snapshot, TailRadius};
use mobgraph::geometry::Domain;
use mobgraph::kernels::KernelParams;
use mobgraph::pointprocess::{sample_ppp, MarkLayers, PointCloud, Vertex};
use mobgraph::rng::{tag, Key};
use mobgraph::stats::dispersion_index;
use serde::Serialize;

use super::{stream, Ctx};
use crate::error::Result;

pub fn run(ctx: &Ctx) -> Result<()> {
    let d = &ctx.cfg.diagnose;
    if d.density {
        density(ctx)?;
    }
    if d.spread {
        spread(ctx)?;
    }
    if d.connectors {
        connectors(ctx)?;
    }
    if d.membership {
        membership(ctx)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct DensityEntry {
    replica: usize,
    seed: u64,
    report: DensityReport,
}

fn density(ctx: &Ctx) -> Result<()> {
    let cfg = &ctx.cfg;
    let d = &cfg.diagnose;
    let dom = cfg.domain()?;
    ctx.check_size(cfg.lambda, &dom)?;
    let cube = Cube::centred(&dom, d.cube_side)?;
    let layers = MarkLayers::new(cfg.theta, cfg.eps_theta, cube.side.powi(dom.dim as i32), dom.dim)?;
    let grid: Vec<f64> = (0..d.density_steps).map(|k| k as f64 * cfg.dt_obs).collect();
    let entries = ctx.replicate(d.density_replicas, |r| {
        let seed = ctx.seed(stream::DENSITY, 0, r);
        let cloud = Arc::new(ctx.cloud(&dom, cfg.palm, seed)?);
        let snaps: Vec<Snapshot> = evolve(cloud, &grid, seed)?.collect();
        let report = density_check(&snaps, &cube, d.cell_side, d.alpha_dense, &layers, cfg.lambda)?;
        Ok(DensityEntry { replica: r, seed, report })
    })?;
    ctx.out.json("density.json", &entries)
}

/// Box of volume `k` and the cube covering it.
fn spread_box(dim: usize, k: f64) -> Result<(Domain, Cube)> {
    let side = k.powf(1.0 / dim as f64);
    Ok((Domain::cube(dim, side)?, Cube::new(vec![0.0; dim], side)?))
}

fn spread_kernel(ctx: &Ctx) -> KernelParams {
    ctx.cfg.kernel_params().with_alpha(ctx.cfg.diagnose.spread_alpha)
}

fn spread_params(ctx: &Ctx, k: f64) -> SpreadParams {
    SpreadParams {
        k,
        theta: ctx.cfg.theta,
        eps_theta: ctx.cfg.eps_theta,
        b: ctx.cfg.diagnose.b,
    }
}

#[derive(Serialize)]
struct SpreadRow {
    #[serde(rename = "K")]
    k: f64,
    replica: usize,
    seed: u64,
    k_p: u32,
    n_p: usize,
    good_boxes: usize,
    distinguished: usize,
    required: usize,
    bottom: usize,
    top_boxes: usize,
    success: bool,
    verified: bool,
}

#[derive(Serialize)]
struct SpreadSummary {
    #[serde(rename = "K")]
    k: f64,
    trials: usize,
    successes: usize,
    success_fraction: f64,
    all_verified: bool,
}

fn spread(ctx: &Ctx) -> Result<()> {
    let d = &ctx.cfg.diagnose;
    let dim = ctx.cfg.domain.dim;
    let kp = spread_kernel(ctx);
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for (ki, &f) in d.k_factors.iter().enumerate() {
        let k = d.k0 * f;
        let (dom, cube) = spread_box(dim, k)?;
        ctx.check_size(d.spread_lambda, &dom)?;
        let params = spread_params(ctx, k);
        log::info!("spread K={k}: {} replicas", d.spread_replicas);
        let these = ctx.replicate(d.spread_replicas, |r| {
            let seed = ctx.seed(stream::SPREAD, ki as u64, r);
            let cloud = Arc::new(sample_ppp(&dom, d.spread_lambda, false, seed)?);
            // only pair queries follow, which are cheapest with no flagged pairs
            let orc = EdgeOracle::new(seed, kp, cloud.clone(), TailRadius::Diameter)?;
            let snap = Snapshot::initial(cloud);
            let edges = orc.epoch_edges(0);
            let sg = build_spread_subgraph(&snap, &edges, &cube, &params)?;
            let verified = match verify_spread(&snap, &edges, &sg, &params) {
                Ok(()) => true,
                Err(e) => {
                    log::error!("K={k} replica {r}: {e}");
                    false
                }
            };
            Ok(SpreadRow {
                k,
                replica: r,
                seed,
                k_p: sg.k_p,
                n_p: sg.n_p,
                good_boxes: sg.boxes.len(),
                distinguished: sg.distinguished.len(),
                required: sg.required,
                bottom: sg.bottom.len(),
                top_boxes: sg.top_boxes,
                success: sg.success,
                verified,
            })
        })?;
        let successes = these.iter().filter(|r| r.success).count();
        summary.push(SpreadSummary {
            k,
            trials: these.len(),
            successes,
            success_fraction: successes as f64 / these.len().max(1) as f64,
            all_verified: these.iter().all(|r| r.verified),
        });
        rows.extend(these);
    }
    ctx.out.write_rows("spread.csv", &rows)?;
    ctx.out.write_rows("spread_summary.csv", &summary)
}

#[derive(Serialize)]
struct ConnectorRow {
    u: f64,
    v: f64,
    r: f64,
    replicas: usize,
    mean: f64,
    variance: f64,
    dispersion: f64,
    bracket: f64,
    mean_over_bracket: f64,
}

#[derive(Serialize)]
struct ConnectorFit {
    /// Largest `C` with `mean >= C * bracket` on every configuration.
    c: f64,
    configurations: usize,
}

/// A Poisson cloud on `dom` plus `x` (id 0, at the origin, mark `u`) and `y`
/// (id 1, at distance `r` along the first axis, mark `v`).
fn pair_cloud(dom: &Domain, lambda: f64, seed: u64, u: f64, v: f64, r: f64) -> Result<PointCloud> {
    let bulk = sample_ppp(dom, lambda, false, seed)?;
    let origin = dom.origin();
    let mut far = origin.0.clone();
    far[0] = dom.wrap_coord(far[0] + r);
    let mut vs = vec![
        Vertex { id: 0, pos: origin, mark: u },
        Vertex { id: 1, pos: far.into(), mark: v },
    ];
    vs.extend(bulk.vertices.into_iter().map(|mut w| {
        w.id += 2;
        w
    }));
    let mut c = PointCloud::from_vertices(*dom, lambda, false, vs)?;
    c.seed = seed;
    Ok(c)
}

fn connectors(ctx: &Ctx) -> Result<()> {
    let d = &ctx.cfg.diagnose;
    let dim = ctx.cfg.domain.dim;
    let dom = Domain::torus(dim, d.connector_volume)?;
    ctx.check_size(d.connector_lambda, &dom)?;
    let kp = ctx.cfg.kernel_params().with_alpha(d.connector_alpha);
    let mut configs = Vec::new();
    for &u in &d.connector_u {
        for &v in &d.connector_v {
            for &r in &d.connector_r {
                configs.push((u, v, r));
            }
        }
    }
    let mut rows = Vec::new();
    for (ci, &(u, v, r)) in configs.iter().enumerate() {
        let counts = ctx.replicate(d.connector_replicas, |rep| {
            let seed = ctx.seed(stream::CONNECTORS, ci as u64, rep);
            let cloud = Arc::new(pair_cloud(&dom, d.connector_lambda, seed, u, v, r)?);
            let orc = EdgeOracle::new(seed, kp, cloud.clone(), TailRadius::Diameter)?;
            let snap = Snapshot::initial(cloud);
            Ok(two_connector_count(&snap, &orc.epoch_edges(0), 0, 1)?)
        })?;
        let xs: Vec<f64> = counts.iter().map(|c| f64::from(c.count)).collect();
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let variance = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let bracket = counts[0].bracket;
        rows.push(ConnectorRow {
            u,
            v,
            r,
            replicas: xs.len(),
            mean,
            variance,
            dispersion: dispersion_index(&xs),
            bracket,
            mean_over_bracket: mean / bracket,
        });
    }
    let c = rows.iter().map(|r| r.mean_over_bracket).fold(f64::INFINITY, f64::min);
    ctx.out.write_rows("connectors.csv", &rows)?;
    ctx.out.write_rows(
        "connectors_fit.csv",
        &[ConnectorFit {
            c,
            configurations: rows.len(),
        }],
    )
}

#[derive(Serialize)]
struct MembershipRow {
    #[serde(rename = "K")]
    k: f64,
    experiment: &'static str,
    successes: u32,
    trials: u32,
    p_hat: f64,
    std_err: f64,
}

fn membership(ctx: &Ctx) -> Result<()> {
    let d = &ctx.cfg.diagnose;
    let dim = ctx.cfg.domain.dim;
    let kp = spread_kernel(ctx);
    let mut rows = Vec::new();
    for (ki, &k) in d.membership_k.iter().enumerate() {
        let (dom, cube) = spread_box(dim, k)?;
        ctx.check_size(d.spread_lambda, &dom)?;
        let params = spread_params(ctx, k);
        let rho = ctx
            .cfg
            .tail_radius
            .unwrap_or_else(|| auto_tail_radius(&kp, d.spread_lambda, &dom, (d.spread_lambda * k).ceil() as usize));
        // (single-time trial, two-time trial), each None when the spread
        // subgraphs it needs were not built
        let outcomes = ctx.replicate(d.membership_replicas, |r| {
            let seed = ctx.seed(stream::MEMBERSHIP, ki as u64, r);
            let cloud = Arc::new(sample_ppp(&dom, d.spread_lambda, false, seed)?);
            let orc = EdgeOracle::new(seed, kp, cloud.clone(), TailRadius::Fixed(rho))?;
            let mut motion = Motion::new(cloud, seed);
            let s1 = motion.snapshot(0.0)?;
            let e1 = orc.epoch_edges(s1.epoch);
            let g1 = build_spread_subgraph(&s1, &e1, &cube, &params)?;
            if !g1.success {
                return Ok((None, None));
            }
            let inside: Vec<usize> = (0..s1.len())
                .filter(|&i| cube.cell_of(s1.pos(i), cube.side, 1).is_some())
                .collect();
            let pick = Key::from_seed(seed).uniform([0, tag::EXPERIMENT, 0, 0]);
            let probe = inside[((pick * inside.len() as f64) as usize).min(inside.len() - 1)];
            let single = membership_single(&s1, &e1, &g1, probe)?;
            let s2 = motion.snapshot(d.membership_t2)?;
            let e2 = orc.epoch_edges(s2.epoch);
            let g2 = build_spread_subgraph(&s2, &e2, &cube, &params)?;
            let two = if g2.success {
                Some(membership_two_time((&s1, &e1, &g1), (&s2, &e2, &g2))?)
            } else {
                None
            };
            Ok((Some(single), two))
        })?;
        for (experiment, hits) in [
            ("single_time", outcomes.iter().filter_map(|o| o.0).collect::<Vec<_>>()),
            ("two_time", outcomes.iter().filter_map(|o| o.1).collect::<Vec<_>>()),
        ] {
            let successes = hits.iter().filter(|&&h| h).count() as u32;
            let e = Estimate::new(successes, hits.len() as u32);
            rows.push(MembershipRow {
                k,
                experiment,
                successes: e.successes,
                trials: e.trials,
                p_hat: e.p_hat,
                std_err: e.std_err,
            });
        }
    }
    ctx.out.write_rows("membership.csv", &rows)
}
