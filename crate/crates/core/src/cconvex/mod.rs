//! Finite-max c-convex potentials `φ(x) = max_i { −c(x, y_i) + a_i }`,
//! their c-transforms, subdifferentials and contact sets.

mod contact;
mod critical;

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::cost::{c_exp, minus_grad_x, CostProfile};
use crate::error::{Error, Result};
use crate::grid::{flat_distance, SphereGrid};
use crate::par;
use crate::sphere::{distance, exp_map, log_map, SpherePoint, TangentVector};

pub use contact::{
    contact_set, contact_tolerance, directed_hausdorff, hausdorff_to_segment, pullback_midpoint_check, ridge_samples, verify_subdiff_eq_csubdiff, ContactSet,
    MidpointCheck, SubdiffVerification, Witness,
};
pub use critical::{critical_point_classifier, CriticalPoint, CriticalReport};

/// Points closer than this are merged into one support.
pub const MERGE_RADIUS: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Support {
    pub y: SpherePoint,
    pub a: f64,
}

impl Support {
    pub fn new(y: SpherePoint, a: f64) -> Self {
        Self { y, a }
    }
}

/// A function on the sphere given in closed form, with the gradients that
/// generate its subdifferential at every point.
pub trait Potential: Sync {
    fn profile(&self) -> &CostProfile;
    fn dim(&self) -> usize;
    fn value(&self, x: &SpherePoint) -> f64;
    /// Gradients of the pieces active at `x`; the subdifferential is
    /// contained in their convex hull.
    fn active_gradients(&self, x: &SpherePoint) -> Result<Vec<TangentVector>>;
    /// Supports whose antipode must be avoided at `x` (targets of the
    /// active pieces).
    fn active_targets(&self, x: &SpherePoint) -> Vec<SpherePoint>;
}

#[derive(Debug, Clone)]
pub struct CConvexPotential {
    profile: CostProfile,
    supports: Vec<Support>,
    dim: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub value: f64,
    /// Supports attaining the max within the active tolerance, ascending.
    pub active: Vec<usize>,
}

impl CConvexPotential {
    /// Builds the potential, merging supports that coincide and keeping the
    /// largest offset of each merged group.
    pub fn new(profile: CostProfile, supports: Vec<Support>) -> Result<Self> {
        let Some(first) = supports.first() else {
            return Err(Error::domain("a c-convex potential needs at least one support"));
        };
        let dim = first.y.dim();
        let mut merged: Vec<Support> = Vec::with_capacity(supports.len());
        for s in supports {
            if s.y.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: s.y.dim() });
            }
            if !s.a.is_finite() {
                return Err(Error::domain("support offsets must be finite"));
            }
            match merged.iter_mut().find(|m| distance(&m.y, &s.y) <= MERGE_RADIUS) {
                Some(m) => m.a = m.a.max(s.a),
                None => merged.push(s),
            }
        }
        Ok(Self { profile, supports: merged, dim })
    }

    pub fn single(profile: CostProfile, y: SpherePoint, a: f64) -> Self {
        let dim = y.dim();
        Self { profile, supports: alloc::vec![Support { y, a }], dim }
    }

    pub fn supports(&self) -> &[Support] {
        &self.supports
    }

    pub fn profile(&self) -> &CostProfile {
        &self.profile
    }

    /// `−c(x, y_i) + a_i`; `−∞` at the antenna singularity.
    pub fn branch(&self, i: usize, x: &SpherePoint) -> f64 {
        let s = &self.supports[i];
        s.a - self.profile.eval(x, &s.y)
    }

    fn branch_flat(&self, i: usize, x: &[f64]) -> f64 {
        let s = &self.supports[i];
        s.a - self.profile.f(flat_distance(x, s.y.coords()))
    }

    pub fn evaluate(&self, x: &SpherePoint) -> Evaluation {
        self.evaluate_with(x, crate::tolerance::Tolerances::default().active_support)
    }

    pub fn evaluate_with(&self, x: &SpherePoint, active_tol: f64) -> Evaluation {
        let values: Vec<f64> = (0..self.supports.len()).map(|i| self.branch(i, x)).collect();
        let value = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let active = values.iter().enumerate().filter(|(_, &v)| v >= value - active_tol).map(|(i, _)| i).collect();
        Evaluation { value, active }
    }

    pub fn value(&self, x: &SpherePoint) -> f64 {
        self.value_flat(x.coords())
    }

    pub(crate) fn value_flat(&self, x: &[f64]) -> f64 {
        (0..self.supports.len()).map(|i| self.branch_flat(i, x)).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn on_grid(&self, grid: &SphereGrid) -> Vec<f64> {
        par::map_indexed(grid.len(), |k| self.value_flat(grid.coords(k)))
    }

    /// Drops supports that never attain the max strictly on the grid.
    pub fn prune_dominated(&self, grid: &SphereGrid) -> Self {
        let winners = par::map_indexed(grid.len(), |k| {
            let x = grid.coords(k);
            let mut best = (usize::MAX, f64::NEG_INFINITY, f64::NEG_INFINITY);
            for i in 0..self.supports.len() {
                let v = self.branch_flat(i, x);
                if v > best.1 {
                    best = (i, v, best.1);
                } else if v > best.2 {
                    best.2 = v;
                }
            }
            if best.1 > best.2 { best.0 } else { usize::MAX }
        });
        let mut keep = alloc::vec![false; self.supports.len()];
        for w in winners.into_iter().filter(|&w| w != usize::MAX) {
            keep[w] = true;
        }
        if !keep.iter().any(|&k| k) {
            return self.clone();
        }
        let supports = self.supports.iter().zip(&keep).filter(|(_, &k)| k).map(|(s, _)| s.clone()).collect();
        Self { profile: self.profile.clone(), supports, dim: self.dim }
    }

    pub fn subdifferential(&self, x: &SpherePoint) -> Result<Subdifferential> {
        let vertices = self.active_gradients(x)?;
        Ok(Subdifferential { x: x.clone(), vertices })
    }

    /// Upper bound on `|D² c(·, y)|` at `x` over targets `y` no farther
    /// from `x` than the farthest support.
    pub fn hessian_bound(&self, x: &SpherePoint) -> f64 {
        let reach = self.supports.iter().map(|s| distance(x, &s.y)).fold(0.0, f64::max);
        hessian_bound(&self.profile, reach)
    }

    /// Bound on `|∇_x c|` over the supports, the Lipschitz constant of `φ`.
    pub fn lipschitz_bound(&self) -> f64 {
        let cut = self.profile.domain_cut();
        let m = self.profile.max_gradient();
        if m.is_finite() { m } else { self.profile.df(cut - 1e-3) }
    }
}

/// `max_{d ≤ reach} max(|f''(d)|, |f'(d) cos d / sin d|)`, sampled.
pub fn hessian_bound(profile: &CostProfile, reach: f64) -> f64 {
    let reach = reach.min(profile.domain_cut() - 1e-6);
    (0..=64)
        .map(|k| {
            let d = reach * k as f64 / 64.0;
            let tangential = if d == 0.0 { profile.d2f(0.0) } else { profile.df(d) * d.cos() / d.sin() };
            profile.d2f(d).abs().max(tangential.abs())
        })
        .fold(0.0, f64::max)
}

impl Potential for CConvexPotential {
    fn profile(&self) -> &CostProfile {
        &self.profile
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &SpherePoint) -> f64 {
        CConvexPotential::value(self, x)
    }

    fn active_gradients(&self, x: &SpherePoint) -> Result<Vec<TangentVector>> {
        let mut out: Vec<TangentVector> = Vec::new();
        for i in self.evaluate(x).active {
            let p = minus_grad_x(&self.profile, x, &self.supports[i].y)?;
            if !out.iter().any(|q| q.add_scaled(-1.0, &p).norm() <= 1e-14) {
                out.push(p);
            }
        }
        Ok(out)
    }

    fn active_targets(&self, x: &SpherePoint) -> Vec<SpherePoint> {
        self.evaluate(x).active.into_iter().map(|i| self.supports[i].y.clone()).collect()
    }
}

/// The subdifferential of a finite-max potential: the convex hull of the
/// active gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct Subdifferential {
    pub x: SpherePoint,
    /// Generators of the hull (for one or two active supports these are
    /// exactly its extreme points).
    pub vertices: Vec<TangentVector>,
}

impl Subdifferential {
    pub fn is_singleton(&self) -> bool {
        self.vertices.len() == 1
    }

    /// Deterministic sample of the hull: vertices, pairwise midpoints and a
    /// θ-grid of `steps` interior points on every pairwise segment.
    pub fn sample(&self, steps: usize) -> Vec<TangentVector> {
        let mut out = self.vertices.clone();
        for (i, a) in self.vertices.iter().enumerate() {
            for b in &self.vertices[i + 1..] {
                for k in 1..=steps {
                    out.push(a.lerp(b, k as f64 / (steps + 1) as f64));
                }
                if steps % 2 == 0 {
                    out.push(a.lerp(b, 0.5));
                }
            }
        }
        out
    }
}

/// Non-c-convex potential `min_i { a_i − c(·, y_i) }`, used to check that
/// the verification can fail. Its kink is concave, so the hull of the active
/// gradients is not a subdifferential.
#[derive(Debug, Clone)]
pub struct ControlPotential {
    profile: CostProfile,
    supports: Vec<Support>,
}

impl ControlPotential {
    /// Offsets chosen so that every piece is active at `x`.
    pub fn tied_at(profile: CostProfile, targets: &[SpherePoint], x: &SpherePoint) -> Self {
        let supports = targets.iter().map(|y| Support { y: y.clone(), a: profile.eval(x, y) }).collect();
        Self { profile, supports }
    }

    pub fn supports(&self) -> &[Support] {
        &self.supports
    }

    fn pieces(&self, x: &SpherePoint) -> impl Iterator<Item = f64> + '_ {
        let x = x.clone();
        self.supports.iter().map(move |s| s.a - self.profile.eval(&x, &s.y))
    }

    fn active(&self, x: &SpherePoint) -> Vec<usize> {
        let best = Potential::value(self, x);
        self.pieces(x).enumerate().filter(|&(_, p)| (p - best).abs() <= 1e-10).map(|(i, _)| i).collect()
    }
}

impl Potential for ControlPotential {
    fn profile(&self) -> &CostProfile {
        &self.profile
    }

    fn dim(&self) -> usize {
        self.supports[0].y.dim()
    }

    fn value(&self, x: &SpherePoint) -> f64 {
        self.pieces(x).fold(f64::INFINITY, f64::min)
    }

    fn active_gradients(&self, x: &SpherePoint) -> Result<Vec<TangentVector>> {
        self.active(x).into_iter().map(|i| minus_grad_x(&self.profile, x, &self.supports[i].y)).collect()
    }

    fn active_targets(&self, x: &SpherePoint) -> Vec<SpherePoint> {
        self.active(x).into_iter().map(|i| self.supports[i].y.clone()).collect()
    }
}

/// Discrete c-transform `ψ(y_j) = max_i { −c(x_i, y_j) − φ(x_i) }` of grid
/// values `φ(x_i)`.
pub fn c_transform(profile: &CostProfile, sources: &SphereGrid, values: &[f64], targets: &SphereGrid) -> Result<Vec<f64>> {
    if values.len() != sources.len() {
        return Err(Error::DimensionMismatch { expected: sources.len(), found: values.len() });
    }
    Ok(par::map_indexed(targets.len(), |j| {
        let y = targets.coords(j);
        (0..sources.len())
            .map(|i| -profile.f(flat_distance(sources.coords(i), y)) - values[i])
            .fold(f64::NEG_INFINITY, f64::max)
    }))
}

/// A point where branches `i` and `j` of `φ` tie, found by bisection on
/// the geodesic from `from` (where `i` wins) to `to` (where `j` wins).
pub fn ridge_point(phi: &CConvexPotential, i: usize, j: usize, from: &SpherePoint, to: &SpherePoint) -> Result<SpherePoint> {
    let gap = |x: &SpherePoint| phi.branch(i, x) - phi.branch(j, x);
    if !(gap(from) > 0.0 && gap(to) < 0.0) {
        return Err(Error::domain("ridge bisection needs a sign change of the branch gap"));
    }
    let v = log_map(from, to)?;
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if gap(&exp_map(&v.scale(mid))) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(exp_map(&v.scale(0.5 * (lo + hi))))
}

/// Newton projection of `q` onto the ridge where branches `i` and `j` tie,
/// moving along the gradient of their gap. `None` when it fails to converge
/// or lands where another branch dominates.
pub(crate) fn project_to_ridge(phi: &CConvexPotential, i: usize, j: usize, q: &SpherePoint) -> Option<SpherePoint> {
    let (yi, yj) = (&phi.supports[i].y, &phi.supports[j].y);
    let mut q = q.clone();
    for _ in 0..40 {
        let gap = phi.branch(i, &q) - phi.branch(j, &q);
        let scale = 1.0 + phi.branch(i, &q).abs();
        if !gap.is_finite() {
            return None;
        }
        if gap.abs() <= 1e-14 * scale {
            let ev = phi.evaluate_with(&q, 1e-9);
            return (ev.active.contains(&i) && ev.active.contains(&j)).then_some(q);
        }
        let grad = minus_grad_x(&phi.profile, &q, yi).ok()?.add_scaled(-1.0, &minus_grad_x(&phi.profile, &q, yj).ok()?);
        let norm2 = grad.dot(&grad);
        if norm2 < 1e-300 {
            return None;
        }
        q = exp_map(&grad.scale(-gap / norm2));
    }
    None
}

/// Point `y_θ` of the c-segment between two supports seen from `x`.
pub fn segment_points(profile: &CostProfile, x: &SpherePoint, y0: &SpherePoint, y1: &SpherePoint, count: usize) -> Result<Vec<SpherePoint>> {
    let (p0, p1) = crate::cost::c_segment_endpoints(profile, x, y0, y1)?;
    (0..count)
        .map(|k| {
            let theta = if count == 1 { 0.0 } else { k as f64 / (count - 1) as f64 };
            c_exp(profile, &p0.lerp(&p1, theta))
        })
        .collect()
}

/// A two-support potential together with a point on its ridge.
#[derive(Debug, Clone)]
pub struct RidgeConfiguration {
    pub potential: CConvexPotential,
    pub x: SpherePoint,
}

/// Random two-support potential `max(−c(·, y₀), −c(·, y₁) + a₁)` and a
/// ridge point `x` with both supports at most `π − margin` away.
pub fn random_ridge_configuration<R: rand::Rng + ?Sized>(profile: &CostProfile, dim: usize, margin: f64, rng: &mut R) -> Result<RidgeConfiguration> {
    use crate::sampling::random_point;
    for _ in 0..1000 {
        let y0 = random_point(rng, dim);
        let y1 = random_point(rng, dim);
        let d01 = distance(&y0, &y1);
        if !(0.3..2.6).contains(&d01) {
            continue;
        }
        let a1 = rng.random_range(-0.3..0.3);
        let phi = CConvexPotential::new(profile.clone(), alloc::vec![Support::new(y0.clone(), 0.0), Support::new(y1, a1)])?;
        let gap = |x: &SpherePoint| phi.branch(0, x) - phi.branch(1, x);
        if gap(&y0) <= 0.0 {
            continue;
        }
        let w = random_point(rng, dim);
        if gap(&w) >= 0.0 || distance(&y0, &w) > core::f64::consts::PI - 0.1 {
            continue;
        }
        let x = ridge_point(&phi, 0, 1, &y0, &w)?;
        let far = phi.supports.iter().map(|s| distance(&x, &s.y)).fold(0.0, f64::max);
        if far <= core::f64::consts::PI - margin {
            return Ok(RidgeConfiguration { potential: phi, x });
        }
    }
    Err(Error::domain("no ridge configuration found"))
}

#[cfg(test)]
mod tests;
