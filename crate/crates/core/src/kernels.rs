//! Connection-probability kernels and their inverses in the distance.
//!
//! Every kernel is a function `p(r, u, v)` of the pair distance and the two
//! marks. Small marks are strong vertices.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{invalid, Result};
use crate::geometry::{Domain, DomainKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// `alpha * min(1, kappa1 * (u^v)^(-delta*gamma) * r^(-delta*d))`.
    Generic,
    /// Edge iff `r <= X * (R_x + R_y)` with `R = u^(-gamma/d)` and
    /// `P(X > s) = min(1, s^(-delta*d))`.
    SoftBoolean,
    /// `phi(beta^-1 * (u^v)^gamma * (u v v)^(1-gamma) * r^d)` with
    /// `phi(s) = min(1, s^-delta)`.
    AgeRcm,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelParams {
    pub variant: Variant,
    pub gamma: f64,
    pub delta: f64,
    pub alpha: f64,
    pub kappa1: f64,
    pub beta: f64,
    pub dim: usize,
}

impl KernelParams {
    /// Parameters with `alpha = kappa1 = beta = 1`.
    pub fn new(variant: Variant, gamma: f64, delta: f64, dim: usize) -> Self {
        KernelParams {
            variant,
            gamma,
            delta,
            alpha: 1.0,
            kappa1: 1.0,
            beta: 1.0,
            dim,
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_kappa1(mut self, kappa1: f64) -> Self {
        self.kappa1 = kappa1;
        self
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return invalid(format!("gamma must lie in (0,1), got {}", self.gamma));
        }
        if !(self.delta > 1.0 && self.delta.is_finite()) {
            return invalid(format!("delta must exceed 1, got {}", self.delta));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return invalid(format!("alpha must lie in (0,1], got {}", self.alpha));
        }
        if !(self.kappa1 > 0.0 && self.kappa1.is_finite()) {
            return invalid(format!("kappa1 must be positive, got {}", self.kappa1));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return invalid(format!("beta must be positive, got {}", self.beta));
        }
        if self.dim == 0 {
            return invalid("dimension must be positive");
        }
        Ok(())
    }

    /// `gamma > delta / (delta + 1)`, the regime with an ever-present giant
    /// and doubly logarithmic distances.
    pub fn is_ultrasmall(&self) -> bool {
        self.gamma > self.delta / (self.delta + 1.0)
    }

    /// Validates and logs a warning outside the ultrasmall regime.
    pub fn check(&self) -> Result<()> {
        self.validate()?;
        if !self.is_ultrasmall() {
            log::warn!(
                "gamma={} <= delta/(delta+1)={:.4}: outside the ultrasmall regime",
                self.gamma,
                self.delta / (self.delta + 1.0)
            );
        }
        Ok(())
    }

    /// The constant `kappa1` for which this kernel dominates
    /// `alpha * min(1, kappa1 * (u^v)^(-delta*gamma) * r^(-delta*d))`.
    pub fn lower_bound_kappa1(&self) -> f64 {
        match self.variant {
            Variant::Generic => self.kappa1,
            Variant::SoftBoolean => 1.0,
            Variant::AgeRcm => self.beta.powf(self.delta),
        }
    }

    /// Largest value the kernel takes.
    pub fn max_prob(&self) -> f64 {
        match self.variant {
            Variant::Generic => self.alpha,
            Variant::SoftBoolean | Variant::AgeRcm => 1.0,
        }
    }
}

/// Soft Boolean radius attached to a mark. `P(R > r) = r^(-d/gamma)` for
/// uniform marks.
pub fn soft_radius(u: f64, kp: &KernelParams) -> f64 {
    u.powf(-kp.gamma / kp.dim as f64)
}

#[inline]
fn base_term(kappa1: f64, m: f64, r: f64, kp: &KernelParams) -> f64 {
    let dd = kp.delta * kp.dim as f64;
    kappa1 * m.powf(-kp.delta * kp.gamma) * r.powf(-dd)
}

/// `alpha * min(1, kappa1 * (u^v)^(-delta*gamma) * r^(-delta*d))` with the
/// variant's own `kappa1`.
pub fn lower_bound_prob(r: f64, u: f64, v: f64, kp: &KernelParams) -> f64 {
    let m = u.min(v);
    kp.alpha * base_term(kp.lower_bound_kappa1(), m, r, kp).min(1.0)
}

/// Edge probability at distance `r` between marks `u` and `v`.
///
/// The soft Boolean and age-dependent forms are evaluated as the lower
/// bound term times a factor that is at least one, so domination of the
/// lower bound holds exactly in floating point too.
#[inline]
pub fn connection_prob(r: f64, u: f64, v: f64, kp: &KernelParams) -> f64 {
    let (m, big) = if u < v { (u, v) } else { (v, u) };
    match kp.variant {
        Variant::Generic => kp.alpha * base_term(kp.kappa1, m, r, kp).min(1.0),
        Variant::SoftBoolean => {
            // (R_u + R_v)^(delta d) = R_m^(delta d) * (1 + (m/big)^(gamma/d))^(delta d)
            let d = kp.dim as f64;
            let boost = (1.0 + (m / big).powf(kp.gamma / d)).powf(kp.delta * d);
            (base_term(1.0, m, r, kp) * boost).min(1.0)
        }
        Variant::AgeRcm => {
            let boost = big.powf(-(1.0 - kp.gamma) * kp.delta);
            (base_term(kp.beta.powf(kp.delta), m, r, kp) * boost).min(1.0)
        }
    }
}

/// `sup { r : connection_prob(r, u, v) > U }`; the edge is present in an
/// epoch with uniform `U` iff the pair distance is below this value.
/// Zero when `U` is at least the kernel's maximum.
pub fn threshold_radius(big_u: f64, u: f64, v: f64, kp: &KernelParams) -> f64 {
    let (m, big) = if u < v { (u, v) } else { (v, u) };
    let d = kp.dim as f64;
    match kp.variant {
        Variant::Generic => {
            if big_u >= kp.alpha {
                return 0.0;
            }
            (kp.kappa1 * kp.alpha * m.powf(-kp.delta * kp.gamma) / big_u).powf(1.0 / (kp.delta * d))
        }
        Variant::SoftBoolean => {
            (soft_radius(u, kp) + soft_radius(v, kp)) * big_u.powf(-1.0 / (kp.delta * d))
        }
        Variant::AgeRcm => {
            let a = m.powf(kp.gamma) * big.powf(1.0 - kp.gamma);
            (kp.beta / (a * big_u.powf(1.0 / kp.delta))).powf(1.0 / d)
        }
    }
}

/// Volume of the unit ball in `d` dimensions.
pub fn unit_ball_volume(d: usize) -> f64 {
    let h = d as f64 / 2.0;
    PI.powf(h) / gamma(h + 1.0)
}

fn check_integrable(kp: &KernelParams) -> Result<()> {
    if !(kp.delta > 1.0) || !(kp.gamma < 1.0) {
        return invalid(format!(
            "expected degree diverges for delta={} gamma={}",
            kp.delta, kp.gamma
        ));
    }
    kp.validate()
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Expected degree of a typical vertex in the whole space at intensity
/// `lambda`. Finite for every variant when `delta > 1` and `gamma < 1`.
pub fn mean_degree_upper(kp: &KernelParams, lambda: f64) -> Result<f64> {
    check_integrable(kp)?;
    let (g, dl) = (kp.gamma, kp.delta);
    let d = kp.dim;
    let radial = unit_ball_volume(d) * dl / (dl - 1.0);
    let value = match kp.variant {
        Variant::Generic => {
            kp.alpha * kp.kappa1.powf(1.0 / dl) * 2.0 / ((1.0 - g) * (2.0 - g))
        }
        Variant::SoftBoolean => {
            let df = d as f64;
            (0..=d)
                .map(|k| {
                    let k = k as f64;
                    binomial(d, k as usize)
                        / ((1.0 - g * k / df) * (1.0 - g * (df - k) / df))
                })
                .sum::<f64>()
        }
        Variant::AgeRcm => kp.beta * 2.0 / (1.0 - g),
    };
    Ok(lambda * radial * value)
}

/// The pair scale `rho` such that `p(r) = max_prob * min(1, (r/rho)^(-delta*d))`.
fn pair_scale(u: f64, v: f64, kp: &KernelParams) -> f64 {
    let (m, big) = if u < v { (u, v) } else { (v, u) };
    let d = kp.dim as f64;
    match kp.variant {
        Variant::Generic => (kp.kappa1 * m.powf(-kp.delta * kp.gamma)).powf(1.0 / (kp.delta * d)),
        Variant::SoftBoolean => soft_radius(u, kp) + soft_radius(v, kp),
        Variant::AgeRcm => (kp.beta / (m.powf(kp.gamma) * big.powf(1.0 - kp.gamma))).powf(1.0 / d),
    }
}

/// `int_0^x min(1, s^-a) ds` for `a > 1`.
fn tail_integral0(x: f64, a: f64) -> f64 {
    if x <= 1.0 {
        x
    } else {
        1.0 + (1.0 - x.powf(1.0 - a)) / (a - 1.0)
    }
}

/// `int_0^x s * min(1, s^-a) ds`.
fn tail_integral1(x: f64, a: f64) -> f64 {
    if x <= 1.0 {
        x * x / 2.0
    } else if (a - 2.0).abs() < 1e-12 {
        0.5 + x.ln()
    } else {
        0.5 + (x.powf(2.0 - a) - 1.0) / (2.0 - a)
    }
}

/// Angular measure of the sphere of radius `r` inside a centred square of
/// side `s` (the torus fundamental domain).
fn square_shell(r: f64, s: f64) -> f64 {
    let h = s / 2.0;
    if r <= h {
        2.0 * PI * r
    } else if r >= h * 2f64.sqrt() {
        0.0
    } else {
        2.0 * PI * r - 8.0 * r * (h / r).acos()
    }
}

/// `E[p(r, u, v)]` over independent uniform marks.
pub fn mean_prob_at(kp: &KernelParams, r: f64) -> f64 {
    let inner = |u: f64| {
        quadrature::integrate(|v| connection_prob(r, u, v, kp), 0.0, u, 1e-12).integral
            + quadrature::integrate(|v| connection_prob(r, u, v, kp), u, 1.0, 1e-12).integral
    };
    quadrature::integrate(inner, 0.0, 1.0, 1e-10).integral.clamp(0.0, 1.0)
}

/// Expected degree in a finite domain: a typical vertex on the torus, or a
/// uniformly placed vertex in a box (counting only partners in the box).
/// Supported for tori in `d = 1, 2` and boxes in `d = 1`.
pub fn mean_degree_finite(kp: &KernelParams, lambda: f64, dom: &Domain) -> Result<f64> {
    check_integrable(kp)?;
    if dom.dim != kp.dim {
        return invalid("kernel and domain dimensions differ");
    }
    let a = kp.delta * kp.dim as f64;
    let s = dom.side;
    let shell_mass: Box<dyn Fn(f64) -> f64> = match (dom.kind, dom.dim) {
        (DomainKind::Torus, 1) => Box::new(move |rho: f64| 2.0 * rho * tail_integral0(s / (2.0 * rho), a)),
        (DomainKind::Box, 1) => Box::new(move |rho: f64| {
            let x = s / rho;
            2.0 * rho * (tail_integral0(x, a) - rho / s * tail_integral1(x, a))
        }),
        (DomainKind::Torus, 2) => Box::new(move |rho: f64| {
            // full disc up to rho, then the shell integral split at the
            // kinks of the square's shell measure
            let core = rho.min(s / 2.0);
            let shell = |r: f64| square_shell(r, s) * (r / rho).powf(-a).min(1.0);
            let mut total = PI * core * core;
            let mut lo = core;
            for hi in [s / 2.0, s / 2f64.sqrt()] {
                if hi > lo {
                    total += quadrature::integrate(shell, lo, hi, 1e-10 * s * s).integral;
                    lo = hi;
                }
            }
            total
        }),
        _ => {
            return invalid(format!(
                "finite-domain degree not available for a {:?} in dimension {}",
                dom.kind, dom.dim
            ))
        }
    };
    let f = |u: f64, v: f64| shell_mass(pair_scale(u, v, kp));
    // the integrand has a kink on the diagonal; integrate each side separately
    let outer = |u: f64| {
        quadrature::integrate(|v| f(u, v), 0.0, u, 1e-11).integral
            + quadrature::integrate(|v| f(u, v), u, 1.0, 1e-11).integral
    };
    let mean = quadrature::integrate(outer, 0.0, 1.0, 1e-9).integral;
    Ok(lambda * kp.max_prob() * mean)
}
