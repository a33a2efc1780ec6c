//! Monge–Ampère residual of a smooth potential given on a geodesic chart,
//! and a quadrature estimate of the pushforward density it induces.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::cost::{c_exp, cost, hessian_xx_in_frame, hessian_xy_in_frames, CostProfile};
use crate::error::{Error, Result};
use crate::grid::sphere_area;
use crate::linalg::{norm, Matrix};
use crate::par;
use crate::sampling::stream_rng;
use crate::sphere::{distance, exp_map, orthonormal_frame, SpherePoint, TangentFrame, TangentVector};

/// Step of the fourth-order first-derivative stencil.
const GRADIENT_STEP: f64 = 1e-4;
/// Step of the fourth-order second-derivative stencil.
const HESSIAN_STEP: f64 = 2e-3;
/// Kernel bandwidth of the pushforward density estimate.
const BANDWIDTH: f64 = 0.05;

/// A potential `φ(x) = f(v)` where `v` are normal coordinates of `x` in a
/// chart centred at the frame's base point.
#[derive(Clone)]
pub struct ChartPotential {
    frame: TangentFrame,
    radius: f64,
    f: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
}

impl fmt::Debug for ChartPotential {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        out.debug_struct("ChartPotential").field("centre", self.frame.base()).field("radius", &self.radius).finish_non_exhaustive()
    }
}

impl ChartPotential {
    /// `radius` bounds the chart and must lie in `(0, π)`.
    pub fn new(frame: TangentFrame, radius: f64, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Result<Self> {
        if !(radius > 0.0 && radius < core::f64::consts::PI) {
            return Err(Error::domain(alloc::format!("chart radius {radius} outside (0, π)")));
        }
        Ok(Self { frame, radius, f: Arc::new(f) })
    }

    pub fn zero(frame: TangentFrame, radius: f64) -> Result<Self> {
        Self::new(frame, radius, |_| 0.0)
    }

    /// `φ = ε·v₁`, a multiple of the first normal coordinate.
    pub fn linear(frame: TangentFrame, radius: f64, eps: f64) -> Result<Self> {
        Self::new(frame, radius, move |v| eps * v[0])
    }

    pub fn centre(&self) -> &SpherePoint {
        self.frame.base()
    }

    pub fn value(&self, x: &SpherePoint) -> Result<f64> {
        let v = self.frame.normal_coordinates(x)?;
        let r = norm(&v);
        if r > self.radius {
            return Err(Error::domain(alloc::format!("point at distance {r} lies outside the chart of radius {}", self.radius)));
        }
        Ok((self.f)(&v))
    }

    /// `φ(exp_x(t u))` for `u` tangent at `x`.
    fn along(&self, u: &TangentVector, t: f64) -> Result<f64> {
        self.value(&exp_map(&u.scale(t)))
    }

    /// Riemannian gradient by fourth-order central differences.
    pub fn gradient(&self, x: &SpherePoint) -> Result<TangentVector> {
        let frame = orthonormal_frame(x, None)?;
        let h = GRADIENT_STEP;
        let comps = (0..frame.dim())
            .map(|k| {
                let u = frame.axis(k);
                let g = |t: f64| self.along(&u, t);
                Ok((-g(2.0 * h)? + 8.0 * g(h)? - 8.0 * g(-h)? + g(-2.0 * h)?) / (12.0 * h))
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(frame.vector(&comps))
    }

    /// Second derivative along the geodesic `t ↦ exp_x(t u)`.
    fn second_derivative(&self, u: &TangentVector) -> Result<f64> {
        let h = HESSIAN_STEP;
        let g = |t: f64| self.along(u, t);
        Ok((-g(2.0 * h)? + 16.0 * g(h)? - 30.0 * g(0.0)? + 16.0 * g(-h)? - g(-2.0 * h)?) / (12.0 * h * h))
    }

    /// Riemannian Hessian in an orthonormal frame at `x`, off-diagonal
    /// entries by polarisation.
    pub fn hessian_in_frame(&self, frame: &TangentFrame) -> Result<Matrix> {
        let k = frame.dim();
        let mut m = Matrix::zeros(k, k);
        for a in 0..k {
            m[(a, a)] = self.second_derivative(&frame.axis(a))?;
            for b in 0..a {
                let (ea, eb) = (frame.axis(a), frame.axis(b));
                let mixed = (self.second_derivative(&ea.add_scaled(1.0, &eb))? - self.second_derivative(&ea.add_scaled(-1.0, &eb))?) / 4.0;
                m[(a, b)] = mixed;
                m[(b, a)] = mixed;
            }
        }
        Ok(m)
    }

    /// `G_φ(x) = c-exp_x(∇φ(x))`, rejected when it reaches the cut.
    pub fn target(&self, profile: &CostProfile, x: &SpherePoint) -> Result<SpherePoint> {
        let y = c_exp(profile, &self.gradient(x)?)?;
        cost(profile, x, &y)?;
        Ok(y)
    }
}

/// Both sides of the Monge–Ampère equation at one point.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MaResidual {
    /// `det(D²φ + D²_xx c(x, G))`
    pub lhs: f64,
    /// `ρ0(x)/ρ1(G)·|det D²_xy c(x, G)|`
    pub rhs: f64,
    pub residual: f64,
    pub target: SpherePoint,
}

/// Residual in a caller-supplied orthonormal frame at `x`; the value does
/// not depend on the frame.
pub fn ma_residual_in_frame(
    profile: &CostProfile,
    phi: &ChartPotential,
    rho0: &(dyn Fn(&SpherePoint) -> f64 + Sync),
    rho1: &(dyn Fn(&SpherePoint) -> f64 + Sync),
    frame: &TangentFrame,
) -> Result<MaResidual> {
    let x = frame.base();
    let target = phi.target(profile, x)?;
    let lhs = phi.hessian_in_frame(frame)?.add(&hessian_xx_in_frame(profile, &target, frame)?).determinant();
    let mixed = hessian_xy_in_frames(profile, frame, &frame.transported_to(&target)?)?;
    let rhs = rho0(x) / rho1(&target) * mixed.determinant().abs();
    Ok(MaResidual { lhs, rhs, residual: lhs - rhs, target })
}

/// Residual `LHS − RHS` in the default frame at `x`.
pub fn ma_residual(
    profile: &CostProfile,
    phi: &ChartPotential,
    rho0: &(dyn Fn(&SpherePoint) -> f64 + Sync),
    rho1: &(dyn Fn(&SpherePoint) -> f64 + Sync),
    x: &SpherePoint,
) -> Result<MaResidual> {
    ma_residual_in_frame(profile, phi, rho0, rho1, &orthonormal_frame(x, None)?)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PushforwardEstimate {
    /// Estimated density of `(G_φ)_# ρ0` at `G_φ(x)`.
    pub density: f64,
    pub target: SpherePoint,
    pub samples: usize,
    pub bandwidth: f64,
    /// Half-width of the sampled box in normal coordinates at `x`.
    pub box_radius: f64,
}

fn kernel(d: f64, h: f64) -> f64 {
    let t = d / h;
    if t < 1.0 {
        (1.0 - t * t).powi(4)
    } else {
        0.0
    }
}

/// `∫ kernel(d(y, ·), h) dvol` on `S^k`, by Simpson's rule in the radius.
fn kernel_mass(k: usize, h: f64) -> f64 {
    let steps = 4096;
    let dt = h / steps as f64;
    let g = |t: f64| kernel(t, h) * t.sin().powi(k as i32 - 1);
    let inner: f64 = (1..steps).map(|i| g(i as f64 * dt) * if i % 2 == 1 { 4.0 } else { 2.0 }).sum();
    sphere_area(k) * (g(0.0) + inner + g(h)) * dt / 3.0
}

/// Density of `(G_φ)_# ρ0` at `G_φ(x)` from `samples` weighted points of a
/// randomly shifted lattice in normal coordinates around `x`, smoothed by
/// a compact polynomial kernel. Bandwidths `h` and `2h` are combined to
/// cancel the `h²` bias.
pub fn pushforward_density(
    profile: &CostProfile,
    phi: &ChartPotential,
    rho0: &(dyn Fn(&SpherePoint) -> f64 + Sync),
    x: &SpherePoint,
    samples: usize,
    seed: u64,
) -> Result<PushforwardEstimate> {
    let frame = orthonormal_frame(x, None)?;
    let k = frame.dim();
    let target = phi.target(profile, x)?;
    let (h, wide) = (BANDWIDTH, 2.0 * BANDWIDTH);
    let side = ((samples.max(2) as f64).powf(1.0 / k as f64).round() as usize).max(2);
    let count = side.pow(k as u32);
    // grow the box until its boundary maps clear of the wide kernel
    let mut radius = 3.0 * wide;
    loop {
        if radius * (k as f64).sqrt() >= 0.5 * core::f64::consts::PI {
            return Err(Error::domain("pushforward box does not fit in a hemisphere"));
        }
        if box_boundary_clear(profile, phi, &frame, radius, &target, wide)? {
            break;
        }
        radius *= 1.5;
    }
    let mut rng = stream_rng(seed, 0);
    let shift: Vec<f64> = (0..k).map(|_| rng.random::<f64>()).collect();
    let step = 2.0 * radius / side as f64;
    let cell = step.powi(k as i32);
    let rows = par::map_indexed(side, |first| -> Result<(f64, f64)> {
        let mut idx = alloc::vec![0usize; k];
        idx[0] = first;
        let (mut narrow, mut broad) = (0.0, 0.0);
        for rest in 0..count / side {
            let mut r = rest;
            for slot in idx.iter_mut().skip(1) {
                *slot = r % side;
                r /= side;
            }
            let v: Vec<f64> = idx.iter().zip(&shift).map(|(&i, s)| -radius + (i as f64 + s) * step).collect();
            let p = frame.point(&v);
            let d = distance(&phi.target(profile, &p)?, &target);
            if d >= wide {
                continue;
            }
            let r = norm(&v);
            let jacobian = if r == 0.0 { 1.0 } else { (r.sin() / r).powi(k as i32 - 1) };
            let w = cell * rho0(&p) * jacobian;
            narrow += w * kernel(d, h);
            broad += w * kernel(d, wide);
        }
        Ok((narrow, broad))
    });
    let (mut narrow, mut broad) = (0.0, 0.0);
    for row in rows {
        let (a, b) = row?;
        narrow += a;
        broad += b;
    }
    let (narrow, broad) = (narrow / kernel_mass(k, h), broad / kernel_mass(k, wide));
    Ok(PushforwardEstimate { density: (4.0 * narrow - broad) / 3.0, target, samples: count, bandwidth: h, box_radius: radius })
}

fn box_boundary_clear(profile: &CostProfile, phi: &ChartPotential, frame: &TangentFrame, radius: f64, target: &SpherePoint, reach: f64) -> Result<bool> {
    let k = frame.dim();
    let per_axis = 24usize;
    for axis in 0..k {
        for sign in [-1.0, 1.0] {
            for j in 0..per_axis.pow(k as u32 - 1) {
                let mut v = alloc::vec![0.0; k];
                let mut r = j;
                for (slot, value) in v.iter_mut().enumerate() {
                    if slot == axis {
                        *value = sign * radius;
                    } else {
                        *value = -radius + 2.0 * radius * (r % per_axis) as f64 / (per_axis - 1) as f64;
                        r /= per_axis;
                    }
                }
                if distance(&phi.target(profile, &frame.point(&v))?, target) <= 1.2 * reach {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Residual with `ρ1` defined as the estimated pushforward density of
/// `ρ0` through `G_φ`, evaluated at `x`.
pub fn ma_self_consistency(
    profile: &CostProfile,
    phi: &ChartPotential,
    rho0: &(dyn Fn(&SpherePoint) -> f64 + Sync),
    x: &SpherePoint,
    samples: usize,
    seed: u64,
) -> Result<(MaResidual, PushforwardEstimate)> {
    let estimate = pushforward_density(profile, phi, rho0, x, samples, seed)?;
    let density = estimate.density;
    let residual = ma_residual(profile, phi, rho0, &move |_: &SpherePoint| density, x)?;
    Ok((residual, estimate))
}
