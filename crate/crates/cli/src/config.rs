//! Run configuration: one TOML document, every key optional.

use std::path::Path;

use mobgraph::geometry::Domain;
use mobgraph::kernels::{KernelParams, Variant};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub replicas: usize,
    /// Intensity of the vertex process.
    pub lambda: f64,
    pub palm: bool,
    /// Pins the mark of the origin vertex.
    pub origin_mark: Option<f64>,
    /// Radius beyond which pairs are handled by skip sampling. Chosen per
    /// domain when absent.
    pub tail_radius: Option<f64>,
    pub theta: f64,
    pub eps_theta: f64,
    pub dt_obs: f64,
    pub t_max: f64,
    /// Refuse runs whose expected vertex count exceeds this.
    pub max_vertices: usize,
    pub domain: DomainConfig,
    pub kernel: KernelConfig,
    pub broadcast: BroadcastConfig,
    pub perc: PercConfig,
    pub diagnose: DiagnoseConfig,
    pub convergence: ConvergenceConfig,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainKindConfig {
    Torus,
    Box,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DomainConfig {
    pub kind: DomainKindConfig,
    pub dim: usize,
    /// Torus volume.
    pub volume: f64,
    /// Box side.
    pub side: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelConfig {
    pub variant: Variant,
    pub gamma: f64,
    pub delta: f64,
    pub alpha: f64,
    pub kappa1: f64,
    pub beta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BroadcastConfig {
    pub volumes: Vec<f64>,
    /// Exponent of `ln ln n` in the normalized column.
    pub epsilon: f64,
    /// Replicas per volume; overrides `replicas` when given.
    pub replicas_per_volume: Option<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PercConfig {
    /// Giant fraction for the percolation proxy.
    pub rho: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnoseConfig {
    pub density: bool,
    pub alpha_dense: f64,
    /// Side of the centred cube checked for density.
    pub cube_side: f64,
    pub cell_side: f64,
    pub density_steps: usize,
    pub density_replicas: usize,

    pub spread: bool,
    pub k0: f64,
    pub k_factors: Vec<f64>,
    /// Evenly-spread density constant; `2^-2d` when absent.
    pub b: Option<f64>,
    pub spread_lambda: f64,
    pub spread_alpha: f64,
    pub spread_replicas: usize,

    pub connectors: bool,
    pub connector_u: Vec<f64>,
    pub connector_v: Vec<f64>,
    pub connector_r: Vec<f64>,
    pub connector_lambda: f64,
    pub connector_alpha: f64,
    pub connector_volume: f64,
    pub connector_replicas: usize,

    pub membership: bool,
    pub membership_k: Vec<f64>,
    pub membership_replicas: usize,
    /// Second observation time of the two-time experiment.
    pub membership_t2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergenceConfig {
    /// Observation steps, decreasing.
    pub dts: Vec<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 1,
            replicas: 20,
            lambda: 4.0,
            palm: true,
            origin_mark: None,
            tail_radius: None,
            theta: 0.55,
            eps_theta: 1.0,
            dt_obs: 0.25,
            t_max: 200.0,
            max_vertices: 5_000_000,
            domain: DomainConfig::default(),
            kernel: KernelConfig::default(),
            broadcast: BroadcastConfig::default(),
            perc: PercConfig::default(),
            diagnose: DiagnoseConfig::default(),
            convergence: ConvergenceConfig::default(),
        }
    }
}

impl Default for DomainConfig {
    fn default() -> Self {
        DomainConfig {
            kind: DomainKindConfig::Torus,
            dim: 1,
            volume: 1024.0,
            side: 1024.0,
        }
    }
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig {
            variant: Variant::Generic,
            gamma: 0.8,
            delta: 1.5,
            alpha: 0.02,
            kappa1: 1.0,
            beta: 1.0,
        }
    }
}

impl Default for BroadcastConfig {
    fn default() -> Self {
        BroadcastConfig {
            volumes: (8..=14).map(|k| f64::from(1u32 << k)).collect(),
            epsilon: 0.5,
            replicas_per_volume: None,
        }
    }
}

impl Default for PercConfig {
    fn default() -> Self {
        PercConfig { rho: 0.25 }
    }
}

impl Default for DiagnoseConfig {
    fn default() -> Self {
        DiagnoseConfig {
            density: true,
            alpha_dense: 0.5,
            cube_side: 64.0,
            cell_side: 16.0,
            density_steps: 64,
            density_replicas: 1,
            spread: true,
            k0: 1000.0,
            k_factors: vec![1.0, 4.0, 16.0],
            b: None,
            spread_lambda: 12.0,
            spread_alpha: 1.0,
            spread_replicas: 100,
            connectors: true,
            connector_u: vec![0.05, 0.15, 0.4],
            connector_v: vec![0.05, 0.15, 0.4],
            connector_r: vec![1.0, 4.0, 12.0],
            connector_lambda: 1.0,
            connector_alpha: 1.0,
            connector_volume: 128.0,
            connector_replicas: 10_000,
            membership: true,
            membership_k: vec![64.0, 256.0, 1024.0],
            membership_replicas: 50,
            membership_t2: 1.5,
        }
    }
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        ConvergenceConfig {
            dts: vec![1.0, 0.5, 0.25, 0.125],
        }
    }
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| bad(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Hex SHA-256 of the effective configuration.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }

    pub fn kernel_params(&self) -> KernelParams {
        let k = &self.kernel;
        KernelParams::new(k.variant, k.gamma, k.delta, self.domain.dim)
            .with_alpha(k.alpha)
            .with_kappa1(k.kappa1)
            .with_beta(k.beta)
    }

    pub fn domain(&self) -> Result<Domain> {
        let d = &self.domain;
        let dom = match d.kind {
            DomainKindConfig::Torus => Domain::torus(d.dim, d.volume),
            DomainKindConfig::Box => Domain::cube(d.dim, d.side),
        };
        Ok(dom?)
    }

    /// Hard errors for unusable values; logs warnings for regimes the
    /// theory does not cover.
    pub fn validate(&self) -> Result<()> {
        if self.replicas == 0 {
            return Err(bad("replicas must be positive"));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(bad("lambda must be positive"));
        }
        if !(self.dt_obs > 0.0) || !(self.t_max >= 0.0) {
            return Err(bad("dt_obs must be positive and t_max non-negative"));
        }
        if let Some(m) = self.origin_mark {
            if !(m > 0.0 && m < 1.0) {
                return Err(bad("origin_mark must lie in (0,1)"));
            }
        }
        if let Some(r) = self.tail_radius {
            if !(r > 0.0) {
                return Err(bad("tail_radius must be positive"));
            }
        }
        if !(self.perc.rho > 0.0 && self.perc.rho < 1.0) {
            return Err(bad("perc.rho must lie in (0,1)"));
        }
        if self.broadcast.volumes.iter().any(|&v| !(v > std::f64::consts::E)) {
            return Err(bad("broadcast volumes must exceed e"));
        }
        if let Some(r) = &self.broadcast.replicas_per_volume {
            if r.len() != self.broadcast.volumes.len() || r.contains(&0) {
                return Err(bad("broadcast.replicas_per_volume needs one positive entry per volume"));
            }
        }
        if self.convergence.dts.is_empty() || self.convergence.dts.windows(2).any(|w| w[1] >= w[0]) {
            return Err(bad("convergence.dts must be non-empty and decreasing"));
        }
        if self.convergence.dts.iter().any(|&d| !(d > 0.0)) {
            return Err(bad("convergence.dts must be positive"));
        }
        self.domain()?;
        let kp = self.kernel_params();
        kp.validate()?;
        if !kp.is_ultrasmall() {
            log::warn!(
                "gamma={} <= delta/(delta+1)={:.4}: outside the ultrasmall regime",
                kp.gamma,
                kp.delta / (kp.delta + 1.0)
            );
        }
        let ln2 = std::f64::consts::LN_2;
        let lo = ln2 / (kp.gamma + kp.gamma / kp.delta);
        if !(self.theta > lo && self.theta < ln2) {
            log::warn!("theta={} outside the window ({lo:.4}, {ln2:.4})", self.theta);
        }
        Ok(())
    }
}
