//! Costs of the form `c(x, y) = f(d(x, y))` on the sphere.
//!
//! The antenna cost is carried in its reduced form
//! `f(d) = −½ log(1 + cos d)`, obtained from `−log|x + y|` by dropping the
//! constant `½ log 2`. [`OriginalAntenna`] exposes `−log|x − y|`, which
//! is the reduced cost composed with the antipodal map on the second
//! argument.

mod tabulated;

use alloc::sync::Arc;
use alloc::vec;
use core::f64::consts::{LN_2, PI};
use core::fmt;
// unused whenever std is linked elsewhere in the build
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix};
use crate::sphere::{self, direction_to, distance, exp_map, orthonormal_frame, SpherePoint, TangentFrame, TangentVector};

pub use tabulated::TabulatedProfile;

/// Default margin to the cut of the profile domain.
pub const CUT_MARGIN: f64 = 1e-9;
const NEWTON_TOL: f64 = 1e-12;
const NEWTON_MAX_ITER: usize = 50;

/// A user-supplied profile `f` with derivatives up to fourth order.
pub trait ProfileFn: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;
    fn value(&self, d: f64) -> f64;
    fn d1(&self, d: f64) -> f64;
    fn d2(&self, d: f64) -> f64;
    fn d3(&self, d: f64) -> f64;
    fn d4(&self, d: f64) -> f64;
    /// Largest admissible distance.
    fn domain_cut(&self) -> f64 {
        PI
    }
}

#[derive(Debug, Clone)]
pub enum CostProfile {
    /// `f(d) = d²/2`
    Quadratic,
    /// `f(d) = −½ log(1 + cos d)`
    AntennaLog,
    Custom(Arc<dyn ProfileFn>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKind {
    Quadratic,
    AntennaLog,
    Custom,
}

impl CostProfile {
    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "quadratic" => Some(Self::Quadratic),
            "antenna" => Some(Self::AntennaLog),
            _ => None,
        }
    }

    pub fn custom(profile: impl ProfileFn + 'static) -> Self {
        Self::Custom(Arc::new(profile))
    }

    pub fn kind(&self) -> ProfileKind {
        match self {
            Self::Quadratic => ProfileKind::Quadratic,
            Self::AntennaLog => ProfileKind::AntennaLog,
            Self::Custom(_) => ProfileKind::Custom,
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Self::Quadratic => "quadratic",
            Self::AntennaLog => "antenna",
            Self::Custom(p) => p.name(),
        }
    }

    pub fn f(&self, d: f64) -> f64 {
        match self {
            Self::Quadratic => 0.5 * d * d,
            Self::AntennaLog => -0.5 * (1.0 + d.cos()).ln(),
            Self::Custom(p) => p.value(d),
        }
    }

    pub fn df(&self, d: f64) -> f64 {
        match self {
            Self::Quadratic => d,
            Self::AntennaLog => 0.5 * (0.5 * d).tan(),
            Self::Custom(p) => p.d1(d),
        }
    }

    pub fn d2f(&self, d: f64) -> f64 {
        match self {
            Self::Quadratic => 1.0,
            Self::AntennaLog => {
                let c = (0.5 * d).cos();
                0.25 / (c * c)
            }
            Self::Custom(p) => p.d2(d),
        }
    }

    pub fn d3f(&self, d: f64) -> f64 {
        match self {
            Self::Quadratic => 0.0,
            Self::AntennaLog => {
                let (s, c) = ((0.5 * d).sin(), (0.5 * d).cos());
                0.25 * s / (c * c * c)
            }
            Self::Custom(p) => p.d3(d),
        }
    }

    pub fn d4f(&self, d: f64) -> f64 {
        match self {
            Self::Quadratic => 0.0,
            Self::AntennaLog => {
                let t = (0.5 * d).tan();
                let sec2 = 1.0 + t * t;
                0.125 * (2.0 * sec2 * t * t + sec2 * sec2)
            }
            Self::Custom(p) => p.d4(d),
        }
    }

    pub fn domain_cut(&self) -> f64 {
        match self {
            Self::Custom(p) => p.domain_cut(),
            _ => PI,
        }
    }

    /// `sup f'` on the domain: the radius of the admissible gradient ball.
    pub fn max_gradient(&self) -> f64 {
        match self {
            Self::Quadratic => PI,
            Self::AntennaLog => f64::INFINITY,
            Self::Custom(p) => p.d1(p.domain_cut()),
        }
    }

    /// `f(d(x, y))` without the admissibility check; `+∞` at the antenna
    /// singularity.
    pub fn eval(&self, x: &SpherePoint, y: &SpherePoint) -> f64 {
        self.f(distance(x, y))
    }

    /// Radial coefficient of the x-Hessian, `f''(r)`.
    fn radial(&self, r: f64) -> f64 {
        self.d2f(r)
    }

    /// Tangential coefficient of the x-Hessian, `f'(r) cos r / sin r`.
    fn tangential_xx(&self, r: f64) -> f64 {
        match self {
            Self::Quadratic => crate::trig::r_cot(r),
            _ if r == 0.0 => self.d2f(0.0),
            _ => self.df(r) * r.cos() / r.sin(),
        }
    }

    /// Tangential coefficient of the mixed Hessian, `−f'(r)/sin r`.
    fn tangential_xy(&self, r: f64) -> f64 {
        match self {
            Self::Quadratic => -1.0 / crate::trig::sinc(r),
            _ if r == 0.0 => -self.d2f(0.0),
            _ => -self.df(r) / r.sin(),
        }
    }

    pub(crate) fn check_admissible(&self, d: f64) -> Result<()> {
        let cut = self.domain_cut();
        if d >= cut - CUT_MARGIN {
            Err(Error::CutLocus { distance: d, cut })
        } else {
            Ok(())
        }
    }
}

/// Any cost on pairs of sphere points.
pub trait PairCost: Sync {
    fn pair_cost(&self, x: &SpherePoint, y: &SpherePoint) -> f64;
}

impl PairCost for CostProfile {
    fn pair_cost(&self, x: &SpherePoint, y: &SpherePoint) -> f64 {
        self.eval(x, y)
    }
}

/// The reflector-antenna cost in its original variables, `−log|x − y|`.
#[derive(Debug, Clone, Copy, Default)]
pub struct OriginalAntenna;

impl OriginalAntenna {
    /// Through the reduced profile: `f(d(x, −y)) − ½ log 2`.
    pub fn via_reduced(x: &SpherePoint, y: &SpherePoint) -> f64 {
        CostProfile::AntennaLog.eval(x, &y.antipode()) - 0.5 * LN_2
    }
}

impl PairCost for OriginalAntenna {
    fn pair_cost(&self, x: &SpherePoint, y: &SpherePoint) -> f64 {
        -x.chord(y).ln()
    }
}

/// `c(x, y)`, rejecting pairs at or beyond the cut of the profile.
pub fn cost(profile: &CostProfile, x: &SpherePoint, y: &SpherePoint) -> Result<f64> {
    let d = distance(x, y);
    profile.check_admissible(d)?;
    Ok(profile.f(d))
}

/// `∇_x c(x, y) = −f'(d) e_y` with `e_y` the unit tangent pointing at `y`.
pub fn grad_x(profile: &CostProfile, x: &SpherePoint, y: &SpherePoint) -> Result<TangentVector> {
    let d = distance(x, y);
    profile.check_admissible(d)?;
    if d == 0.0 {
        return Ok(x.zero_tangent());
    }
    Ok(direction_to(x, y).scale(-profile.df(d)))
}

/// `p = −∇_x c(x, y)`, the "gradient" coordinate of `y` seen from `x`.
pub fn minus_grad_x(profile: &CostProfile, x: &SpherePoint, y: &SpherePoint) -> Result<TangentVector> {
    Ok(grad_x(profile, x, y)?.scale(-1.0))
}

/// Hessian block together with the frame(s) it is expressed in.
#[derive(Debug, Clone)]
pub struct HessianBlock {
    pub frame_x: TangentFrame,
    /// Frame at `y` for the mixed block (equal to `frame_x` for `D²_xx`).
    pub frame_y: TangentFrame,
    pub matrix: Matrix,
}

fn canonical_frame(x: &SpherePoint, y: &SpherePoint, d: f64) -> Result<TangentFrame> {
    if d == 0.0 {
        return orthonormal_frame(x, None);
    }
    let u = direction_to(x, y);
    if u.norm() == 0.0 {
        orthonormal_frame(x, None)
    } else {
        orthonormal_frame(x, Some(&u))
    }
}

/// `D²_xx c(x, y)` in the normal frame at `x` whose first axis points at
/// `y`: `diag(f''(r), f'(r) cos r / sin r, …)`.
pub fn hessian_xx(profile: &CostProfile, x: &SpherePoint, y: &SpherePoint) -> Result<HessianBlock> {
    let d = distance(x, y);
    profile.check_admissible(d)?;
    let frame = canonical_frame(x, y, d)?;
    let mut diag = vec![profile.tangential_xx(d); frame.dim()];
    diag[0] = profile.radial(d);
    Ok(HessianBlock { frame_y: frame.clone(), frame_x: frame, matrix: Matrix::from_diagonal(&diag) })
}

/// `D²_xx c(x, y)(a, b)` for tangent vectors at `x`.
pub fn hessian_xx_form(profile: &CostProfile, x: &SpherePoint, y: &SpherePoint, a: &TangentVector, b: &TangentVector) -> Result<f64> {
    let d = distance(x, y);
    profile.check_admissible(d)?;
    let u = direction_to(x, y);
    let (au, bu) = (dot(a.vec(), u.vec()), dot(b.vec(), u.vec()));
    let perp = a.dot(b) - au * bu;
    Ok(profile.radial(d) * au * bu + profile.tangential_xx(d) * perp)
}

/// `D²_xx c(x, y)` expressed in an arbitrary orthonormal frame at `x`.
pub fn hessian_xx_in_frame(profile: &CostProfile, y: &SpherePoint, frame: &TangentFrame) -> Result<Matrix> {
    let x = frame.base();
    let axes: alloc::vec::Vec<TangentVector> = (0..frame.dim()).map(|k| frame.axis(k)).collect();
    let mut m = Matrix::zeros(frame.dim(), frame.dim());
    for i in 0..frame.dim() {
        for j in 0..frame.dim() {
            m[(i, j)] = hessian_xx_form(profile, x, y, &axes[i], &axes[j])?;
        }
    }
    Ok(m)
}

/// `D²_xy c(x, y)(a, b)` for `a` tangent at `x` and `b` tangent at `y`.
pub fn hessian_xy_form(profile: &CostProfile, x: &SpherePoint, y: &SpherePoint, a: &TangentVector, b: &TangentVector) -> Result<f64> {
    let d = distance(x, y);
    profile.check_admissible(d)?;
    let u = direction_to(x, y);
    if d == 0.0 || u.norm() == 0.0 {
        return Ok(-profile.d2f(0.0) * a.dot(b));
    }
    // velocity at y of the geodesic leaving x towards y
    let u_end = direction_to(y, x).scale(-1.0);
    let au = dot(a.vec(), u.vec());
    let bu = dot(b.vec(), u_end.vec());
    let a_perp = a.add_scaled(-au, &u);
    let b_perp = b.vec().iter().zip(u_end.vec()).map(|(bc, uc)| bc - bu * uc);
    let perp: f64 = a_perp.vec().iter().zip(b_perp).map(|(p, q)| p * q).sum();
    Ok(-profile.radial(d) * au * bu + profile.tangential_xy(d) * perp)
}

/// `D²_xy c(x, y)` in the canonical frame at `x` and its parallel
/// transport to `y`: `diag(−f''(r), −f'(r)/sin r, …)`.
pub fn hessian_xy(profile: &CostProfile, x: &SpherePoint, y: &SpherePoint) -> Result<HessianBlock> {
    let d = distance(x, y);
    profile.check_admissible(d)?;
    let frame_x = canonical_frame(x, y, d)?;
    let frame_y = frame_x.transported_to(y)?;
    let mut diag = vec![profile.tangential_xy(d); frame_x.dim()];
    diag[0] = -profile.radial(d);
    Ok(HessianBlock { frame_x, frame_y, matrix: Matrix::from_diagonal(&diag) })
}

/// Mixed block in caller-supplied frames at `x` and `y`.
pub fn hessian_xy_in_frames(profile: &CostProfile, frame_x: &TangentFrame, frame_y: &TangentFrame) -> Result<Matrix> {
    let (x, y) = (frame_x.base(), frame_y.base());
    let mut m = Matrix::zeros(frame_x.dim(), frame_y.dim());
    for i in 0..frame_x.dim() {
        for j in 0..frame_y.dim() {
            m[(i, j)] = hessian_xy_form(profile, x, y, &frame_x.axis(i), &frame_y.axis(j))?;
        }
    }
    Ok(m)
}

/// Solves `f'(d) = s` on `[0, cut)` by Newton's method safeguarded with
/// bisection.
pub fn inverse_gradient_norm(profile: &CostProfile, s: f64) -> Result<f64> {
    let limit = profile.max_gradient();
    if !(s >= 0.0) || s >= limit - CUT_MARGIN {
        return Err(Error::GradientOutOfRange { norm: s, limit });
    }
    if s == 0.0 {
        return Ok(0.0);
    }
    let cut = profile.domain_cut();
    let (mut lo, mut hi) = (0.0, cut);
    let curvature = profile.d2f(0.0);
    let mut d = if curvature > 0.0 { s / curvature } else { 0.5 * cut };
    if !(d > lo && d < hi) {
        d = 0.5 * (lo + hi);
    }
    let tol = NEWTON_TOL * s.max(1.0);
    for _ in 0..NEWTON_MAX_ITER {
        let residual = profile.df(d) - s;
        if residual.abs() <= tol {
            return Ok(d);
        }
        if residual > 0.0 {
            hi = d;
        } else {
            lo = d;
        }
        let slope = profile.d2f(d);
        let newton = d - residual / slope;
        d = if slope > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    Ok(d)
}

/// The c-exponential: the unique `y` with `−∇_x c(x, y) = p`.
pub fn c_exp(profile: &CostProfile, p: &TangentVector) -> Result<SpherePoint> {
    let s = p.norm();
    if s == 0.0 {
        return Ok(p.base().clone());
    }
    let d = inverse_gradient_norm(profile, s)?;
    Ok(exp_map(&p.scale(d / s)))
}

/// Point `y_θ` of the c-segment `[y₀, y₁]_x`:
/// `−∇_x c(x, y_θ) = (1 − θ) p₀ + θ p₁`.
pub fn c_segment(profile: &CostProfile, x: &SpherePoint, y0: &SpherePoint, y1: &SpherePoint, theta: f64) -> Result<SpherePoint> {
    let (p0, p1) = c_segment_endpoints(profile, x, y0, y1)?;
    c_exp(profile, &p0.lerp(&p1, theta))
}

/// `(p₀, p₁) = (−∇_x c(x, y₀), −∇_x c(x, y₁))`, refusing antipodal endpoints.
pub fn c_segment_endpoints(profile: &CostProfile, x: &SpherePoint, y0: &SpherePoint, y1: &SpherePoint) -> Result<(TangentVector, TangentVector)> {
    for y in [y0, y1] {
        if distance(x, y) >= PI - sphere::ANTIPODAL_MARGIN {
            return Err(Error::AntipodalEndpoint);
        }
    }
    Ok((minus_grad_x(profile, x, y0)?, minus_grad_x(profile, x, y1)?))
}

#[cfg(test)]
mod tests;
