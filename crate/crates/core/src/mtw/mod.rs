//! The cost-sectional (MTW) curvature
//! `𝔖_c(x₀, y₀)(ξ, ν) = ∂²_s ∂²_t F(0, 0)`, with
//! `F(s, t) = −c(exp_{x₀}(sξ), c-exp_{x₀}(p₀ + tν))` and
//! `p₀ = −∇_x c(x₀, y₀)`.
//!
//! Two routes are provided: a fourth-order finite-difference stencil on
//! `F` for every profile, and an exact closed form for the quadratic cost.

use alloc::vec::Vec;
use core::f64::consts::PI;
// unused whenever std is linked elsewhere in the build
#[allow(unused_imports)]
use num_traits::Float;

use crate::cost::{c_exp, minus_grad_x, CostProfile, ProfileKind};
use crate::error::{Error, Result};
use crate::sampling::{random_orthonormal_pair, random_point, random_unit_tangent, stream_rng};
use crate::sphere::{distance, exp_map, SpherePoint, TangentVector};
use crate::{par, trig};

/// Factor relating the closed-form expression to the definition. Both
/// sides are the same fourth derivative, so the factor is one; the
/// route-equivalence tests pin it.
pub const ROUTE_FACTOR: f64 = 1.0;

/// Orthogonality tolerance for `(ξ, ν)` relative to `|ξ||ν|`.
pub const ORTHOGONALITY_TOL: f64 = 1e-10;

const STENCIL: [(f64, f64); 5] = [(-2.0, -1.0), (-1.0, 16.0), (0.0, -30.0), (1.0, 16.0), (2.0, -1.0)];

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CurvatureQuery {
    pub x: SpherePoint,
    pub y: SpherePoint,
    /// `p₀ = −∇_x c(x, y)`
    pub p0: TangentVector,
    pub xi: TangentVector,
    pub nu: TangentVector,
}

impl CurvatureQuery {
    pub fn new(profile: &CostProfile, x: &SpherePoint, y: &SpherePoint, xi: TangentVector, nu: TangentVector) -> Result<Self> {
        let p0 = minus_grad_x(profile, x, y)?;
        Ok(Self { x: x.clone(), y: y.clone(), p0, xi: TangentVector::new(x, xi.vec().to_vec())?, nu: TangentVector::new(x, nu.vec().to_vec())? })
    }

    /// Same query with `ξ, ν` replaced by `aξ, bν`.
    pub fn scaled(&self, a: f64, b: f64) -> Self {
        Self { xi: self.xi.scale(a), nu: self.nu.scale(b), ..self.clone() }
    }

    pub fn is_orthogonal(&self) -> bool {
        self.xi.dot(&self.nu).abs() <= ORTHOGONALITY_TOL * self.xi.norm() * self.nu.norm()
    }

    /// Decomposition `p₀ = α + tβ` with `β = ν`, `α ⊥ β`; returns
    /// `(r, c/|α|, t)` with `r = |p₀|` and `c = α·ξ/|ξ|`.
    pub fn coordinates(&self) -> (f64, f64, f64) {
        let (alpha, t) = split(&self.p0, &self.nu);
        let a = alpha.norm();
        let xi_n = self.xi.norm();
        let c_ratio = if a > 0.0 && xi_n > 0.0 { alpha.dot(&self.xi) / (a * xi_n) } else { 0.0 };
        (self.p0.norm(), c_ratio, t)
    }

    fn eval_f(&self, profile: &CostProfile, s: f64, t: f64) -> Result<f64> {
        let x = exp_map(&self.xi.scale(s));
        let y = c_exp(profile, &self.p0.add_scaled(t, &self.nu))?;
        // x moves by at most |sξ|, so this bound keeps every pair of the
        // stencil on the same side of the cut
        let reach = distance(&self.x, &y) + (s * self.xi.norm()).abs();
        let cut = profile.domain_cut();
        if reach >= cut - crate::cost::CUT_MARGIN {
            return Err(Error::CutLocus { distance: reach, cut });
        }
        Ok(-profile.f(distance(&x, &y)))
    }
}

fn split(p: &TangentVector, beta: &TangentVector) -> (TangentVector, f64) {
    let b2 = beta.dot(beta);
    if b2 == 0.0 {
        return (p.clone(), 0.0);
    }
    let t = p.dot(beta) / b2;
    (p.add_scaled(-t, beta), t)
}

/// Fourth mixed derivative of `F` by the tensor product of two five-point
/// second-difference stencils with step `h` (25 evaluations).
pub fn mtw_fd(profile: &CostProfile, q: &CurvatureQuery, h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::domain("finite-difference step must be positive"));
    }
    let mut acc = 0.0;
    for &(i, wi) in &STENCIL {
        for &(j, wj) in &STENCIL {
            acc += wi * wj * q.eval_f(profile, i * h, j * h)?;
        }
    }
    Ok(acc / (144.0 * h.powi(4)))
}

/// Richardson extrapolation of [`mtw_fd`] over `h` and `h/2`.
pub fn mtw_fd_richardson(profile: &CostProfile, q: &CurvatureQuery, h: f64) -> Result<f64> {
    let coarse = mtw_fd(profile, q, h)?;
    let fine = mtw_fd(profile, q, 0.5 * h)?;
    Ok((16.0 * fine - coarse) / 15.0)
}

/// Semi-analytic route: `−∂²_t D²_xx c(x₀, c-exp(p₀ + tν))(ξ, ξ)` with the
/// exact Hessian and a five-point difference in `t` only.
pub fn mtw_hessian_fd(profile: &CostProfile, q: &CurvatureQuery, h: f64) -> Result<f64> {
    let mut acc = 0.0;
    for &(j, w) in &STENCIL {
        let y = c_exp(profile, &q.p0.add_scaled(j * h, &q.nu))?;
        acc -= w * crate::cost::hessian_xx_form(profile, &q.x, &y, &q.xi, &q.xi)?;
    }
    Ok(acc / (12.0 * h * h))
}

/// Exact value for the quadratic cost. Requires `ξ ⊥ ν`.
pub fn mtw_closed_form(profile: &CostProfile, q: &CurvatureQuery) -> Result<f64> {
    if profile.kind() != ProfileKind::Quadratic {
        return Err(Error::domain("closed form is available for the quadratic cost only"));
    }
    if !q.is_orthogonal() {
        return Err(Error::domain("closed form needs orthogonal ξ and ν"));
    }
    let xi2 = q.xi.dot(&q.xi);
    let beta2 = q.nu.dot(&q.nu);
    if xi2 == 0.0 || beta2 == 0.0 {
        return Ok(0.0);
    }
    let (alpha, t) = split(&q.p0, &q.nu);
    let r = q.p0.norm();
    if r >= PI {
        return Err(Error::domain("closed form needs |p₀| < π"));
    }
    let c = alpha.dot(&q.xi) / xi2.sqrt();
    Ok(ROUTE_FACTOR * xi2 * closed_form_unit(r, c, alpha.dot(&alpha), t, beta2))
}

/// The closed form for unit `ξ`, in the variables `r = |α + tβ|`,
/// `c = α·ξ`, `|α|²`, `t` and `|β|²`.
pub fn closed_form_unit(r: f64, c: f64, alpha2: f64, t: f64, beta2: f64) -> f64 {
    if r < 1e-8 {
        return 2.0 / 3.0 * beta2;
    }
    let s = r.sin();
    let a = trig::r_minus_sin_cos(r); // r − s·cos r
    let b = trig::sin_minus_r_cos(r); // s − r·cos r
    let k = c * c / (r * r);
    let first = alpha2 * beta2 / r.powi(3) * (a / (s * s) * (1.0 - k) + b / s * 2.0 * k / r);
    let second = t * t * beta2 * beta2 / (r * r)
        * (2.0 / s.powi(3) * b * (1.0 - k) + 2.0 / (s * s) * a * 2.0 * k / r - b / s * 6.0 * k / (r * r));
    first + second
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum MtwRoute {
    ClosedForm,
    FiniteDifference,
}

/// Route used by scans: exact for the quadratic cost, Richardson-extrapolated
/// stencil otherwise.
pub fn default_route(profile: &CostProfile) -> MtwRoute {
    match profile.kind() {
        ProfileKind::Quadratic => MtwRoute::ClosedForm,
        _ => MtwRoute::FiniteDifference,
    }
}

/// Stencil step that keeps every stencil point inside the admissible region.
pub fn scan_step(d: f64, cut: f64) -> f64 {
    (0.1 * (cut - d)).clamp(1e-3, 1e-2)
}

pub fn mtw_value(profile: &CostProfile, q: &CurvatureQuery, route: MtwRoute) -> Result<f64> {
    match route {
        MtwRoute::ClosedForm => mtw_closed_form(profile, q),
        MtwRoute::FiniteDifference => {
            let h = scan_step(distance(&q.x, &q.y), profile.domain_cut());
            mtw_fd_richardson(profile, q, h)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InequalityConstants {
    /// `inf (sin r − r cos r)/r³`
    pub c_util1: f64,
    pub argmin_util1: f64,
    /// `inf (r − sin r cos r)/r³`
    pub c_util2: f64,
    pub argmin_util2: f64,
    /// `min ½(r sin 2r + 3 cos 2r + 4r² − 3)`
    pub min_trig: f64,
    pub argmin_trig: f64,
}

/// Grid infima of the three scalar inequalities behind the positivity
/// proof: `r ∈ [1e−6, π]` for the two ratios, `[0, π]` for the last.
pub fn inequality_constants(grid: usize) -> InequalityConstants {
    let grid = grid.max(2);
    let at = |lo: f64, k: usize| lo + (PI - lo) * k as f64 / (grid - 1) as f64;
    let argmin = |g: &(dyn Fn(f64) -> f64 + Sync), lo: f64| {
        par::map_indexed(grid, |k| {
            let r = at(lo, k);
            (g(r), r)
        })
        .into_iter()
        .fold((f64::INFINITY, 0.0), |best, cur| if cur.0 < best.0 { cur } else { best })
    };
    let (c_util1, argmin_util1) = argmin(&|r| trig::sin_minus_r_cos(r) / r.powi(3), 1e-6);
    let (c_util2, argmin_util2) = argmin(&|r| trig::r_minus_sin_cos(r) / r.powi(3), 1e-6);
    let (min_trig, argmin_trig) = argmin(&trig::trig_positivity, 0.0);
    InequalityConstants { c_util1, argmin_util1, c_util2, argmin_util2, min_trig, argmin_trig }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MtwRow {
    pub r: f64,
    pub c_ratio: f64,
    pub t: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MtwReport {
    pub profile: alloc::string::String,
    pub dim: usize,
    pub route: MtwRoute,
    pub samples: usize,
    pub min_value: f64,
    pub argmin_index: usize,
    pub argmin: CurvatureQuery,
    /// The margin σ: every pair satisfies `d(x, y) ≤ π − σ`.
    pub margin: f64,
    /// Minimum over unit orthogonal `(ξ, ν)`.
    pub c0_estimate: f64,
    pub rows: Vec<MtwRow>,
}

impl MtwReport {
    pub fn certified(&self) -> bool {
        self.c0_estimate > 0.0
    }
}

/// Sample `index` of a scan: a uniform base point, a distance drawn
/// uniformly from `(0, π)` and clamped to `π − σ`, a uniform direction and
/// a uniform orthonormal pair `(ξ, ν)`. The raw draws do not depend on σ, so
/// scans with decreasing σ see nested configurations.
pub fn scan_query(profile: &CostProfile, dim: usize, sigma: f64, seed: u64, index: usize) -> Result<CurvatureQuery> {
    let mut rng = stream_rng(seed, index as u64);
    let x = random_point(&mut rng, dim);
    let raw: f64 = rand::Rng::random_range(&mut rng, 0.0..PI);
    let d = raw.min(profile.domain_cut() - sigma);
    let dir = random_unit_tangent(&mut rng, &x);
    let (xi, nu) = random_orthonormal_pair(&mut rng, &x);
    let y = exp_map(&dir.scale(d));
    CurvatureQuery::new(profile, &x, &y, xi, nu)
}

/// Seeded scan certifying condition As on `d(x, y) ≤ π − σ`.
pub fn certify_as(profile: &CostProfile, dim: usize, sigma: f64, samples: usize, seed: u64) -> Result<MtwReport> {
    if !(sigma > 0.0) || samples == 0 {
        return Err(Error::domain("certify_as needs σ > 0 and at least one sample"));
    }
    if dim < crate::sphere::MIN_DIM {
        return Err(Error::UnsupportedDimension(dim));
    }
    let route = default_route(profile);
    let results = par::map_indexed(samples, |i| -> Result<(CurvatureQuery, f64)> {
        let q = scan_query(profile, dim, sigma, seed, i)?;
        let v = mtw_value(profile, &q, route)?;
        Ok((q, v))
    });
    let mut rows = Vec::with_capacity(samples);
    let mut best: Option<(usize, f64, CurvatureQuery)> = None;
    for (i, res) in results.into_iter().enumerate() {
        let (q, value) = res?;
        let (r, c_ratio, t) = q.coordinates();
        rows.push(MtwRow { r, c_ratio, t, value });
        // strict comparison keeps the lowest index on ties
        if best.as_ref().is_none_or(|b| value < b.1) {
            best = Some((i, value, q));
        }
    }
    let (argmin_index, min_value, argmin) = best.expect("at least one sample");
    Ok(MtwReport {
        profile: profile.name().into(),
        dim,
        route,
        samples,
        min_value,
        argmin_index,
        argmin,
        margin: sigma,
        c0_estimate: min_value,
        rows,
    })
}

#[cfg(test)]
mod tests;
