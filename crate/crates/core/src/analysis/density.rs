use serde::Serialize;

use super::Cube;
use crate::dynamics::Snapshot;
use crate::error::{invalid, Result};
use crate::pointprocess::{layer_of, MarkLayers};

/// Count check of every (subcube, mark layer) cell over a run of snapshots.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityReport {
    pub cube: Cube,
    pub cell_side: f64,
    pub cells_per_side: usize,
    pub alpha: f64,
    /// Layers `-1..=k_max` in order, with their count thresholds.
    pub layers: Vec<i32>,
    pub thresholds: Vec<f64>,
    pub times: Vec<f64>,
    pub passed: Vec<bool>,
    /// Smallest count over cells divided by its threshold, per time.
    pub worst_ratio: Vec<f64>,
    pub dense_fraction: f64,
}

/// A time passes when every subcube of side `cell_side` holds, in every mark
/// layer `I_k`, at least `(1 - alpha) lambda |I_k| cell_side^d` vertices.
pub fn density_check(
    snapshots: &[Snapshot],
    cube: &Cube,
    cell_side: f64,
    alpha: f64,
    layers: &MarkLayers,
    lambda: f64,
) -> Result<DensityReport> {
    if !(cell_side > 0.0) {
        return invalid("cell side must be positive");
    }
    let ratio = cube.side / cell_side;
    let per_side = ratio.round();
    if per_side < 1.0 || (ratio - per_side).abs() > 1e-9 * ratio {
        return invalid(format!("cell side {cell_side} does not divide the cube side {}", cube.side));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return invalid(format!("alpha must lie in [0,1], got {alpha}"));
    }
    if !(lambda > 0.0) {
        return invalid("intensity must be positive");
    }
    if layers.dim != cube.dim() {
        return invalid("layer and cube dimensions differ");
    }
    let per_side = per_side as usize;
    let d = cube.dim();
    let cells = per_side.pow(d as u32);
    let ks: Vec<i32> = layers.layers().collect();
    let vol = cell_side.powi(d as i32);
    let thresholds: Vec<f64> = ks.iter().map(|&k| (1.0 - alpha) * lambda * layers.width(k) * vol).collect();
    let mut report = DensityReport {
        cube: cube.clone(),
        cell_side,
        cells_per_side: per_side,
        alpha,
        layers: ks.clone(),
        thresholds: thresholds.clone(),
        times: Vec::new(),
        passed: Vec::new(),
        worst_ratio: Vec::new(),
        dense_fraction: 0.0,
    };
    let mut counts = vec![0u64; cells * ks.len()];
    for snap in snapshots {
        if snap.domain().dim != d {
            return invalid("snapshot and cube dimensions differ");
        }
        counts.iter_mut().for_each(|c| *c = 0);
        for (i, v) in snap.cloud.vertices.iter().enumerate() {
            let Some(k) = layer_of(v.mark, layers) else { continue };
            if let Some(cell) = cube.cell_of(snap.pos(i), cell_side, per_side) {
                counts[(k + 1) as usize * cells + cell] += 1;
            }
        }
        let mut worst = f64::INFINITY;
        let mut pass = true;
        for (l, &th) in thresholds.iter().enumerate() {
            for &c in &counts[l * cells..(l + 1) * cells] {
                let c = c as f64;
                pass &= c >= th;
                if th > 0.0 {
                    worst = worst.min(c / th);
                }
            }
        }
        report.times.push(snap.time);
        report.passed.push(pass);
        report.worst_ratio.push(worst);
    }
    if !snapshots.is_empty() {
        report.dense_fraction = report.passed.iter().filter(|&&p| p).count() as f64 / snapshots.len() as f64;
    }
    Ok(report)
}
