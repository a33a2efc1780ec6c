use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use super::{CConvexPotential, Potential, Subdifferential};
use crate::cost::{c_exp, minus_grad_x, CostProfile};
use crate::error::{Error, Result};
use crate::grid::{flat_distance, BallTree, SphereGrid};
use crate::par;
use crate::sphere::{distance, exp_map, log_map, SpherePoint, TangentVector, ANTIPODAL_MARGIN};
use crate::tolerance::Tolerances;

/// Grid approximation of `G_φ(x)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ContactSet {
    pub x: SpherePoint,
    /// Indices of member grid points, ascending.
    pub members: Vec<usize>,
    pub is_full_sphere: bool,
    pub tol: f64,
}

impl ContactSet {
    pub fn points(&self, grid: &SphereGrid) -> Vec<SpherePoint> {
        self.members.iter().map(|&j| grid.point(j).clone()).collect()
    }

    pub fn is_singleton(&self) -> bool {
        self.members.len() == 1
    }
}

/// Values of `φ` on the grid plus its ridge samples, organised for fast
/// minimisation of `h_y = φ + c(·, y)`.
struct Landscape<'a> {
    profile: &'a CostProfile,
    dim: usize,
    flat: Vec<f64>,
    values: Vec<f64>,
    tree: BallTree,
    /// Smallest `φ` value inside each tree node.
    node_min: Vec<f64>,
}

impl<'a> Landscape<'a> {
    fn new(phi: &'a CConvexPotential, grid: &SphereGrid, x: &SpherePoint) -> Self {
        let mut flat: Vec<f64> = (0..grid.len()).flat_map(|k| grid.coords(k).iter().copied()).collect();
        let mut values = phi.on_grid(grid);
        for p in ridge_samples(phi, grid).iter().chain(core::iter::once(x)) {
            flat.extend_from_slice(p.coords());
            values.push(phi.value(p));
        }
        let dim = grid.dim();
        let tree = BallTree::build(dim, &flat);
        let node_min = tree
            .nodes()
            .iter()
            .map(|node| tree.points_of(node).iter().map(|&i| values[i as usize]).fold(f64::INFINITY, f64::min))
            .collect();
        Self { profile: phi.profile(), dim, flat, values, tree, node_min }
    }

    fn h(&self, i: u32, y: &[f64]) -> f64 {
        let i = i as usize;
        self.values[i] + self.profile.f(flat_distance(&self.flat[i * self.dim..(i + 1) * self.dim], y))
    }

    fn lower(&self, id: usize, y: &[f64]) -> f64 {
        let node = &self.tree.nodes()[id];
        self.node_min[id] + self.profile.f((flat_distance(&node.centre, y) - node.radius).max(0.0))
    }

    fn min_h(&self, y: &[f64]) -> f64 {
        self.tree.minimum(|id| self.lower(id, y), |i| self.h(i, y)).0
    }

    fn undercuts(&self, y: &[f64], threshold: f64) -> bool {
        self.tree.any_below(threshold, |id| self.lower(id, y), |i| self.h(i, y))
    }
}

/// Default membership tolerance, calibrated to the grid.
///
/// Targets `y` of slopes in the interior of `∂φ(x)` are probed two grid
/// spacings off the target set, in directions normal to it. The deficit of
/// `x` grows quadratically there, and a quarter of the smallest probed
/// deficit separates grid points within about one spacing of the target set
/// from those beyond two.
pub fn contact_tolerance(phi: &CConvexPotential, x: &SpherePoint, grid: &SphereGrid) -> Result<f64> {
    let floor = Tolerances::default().grid_min;
    let land = Landscape::new(phi, grid, x);
    let profile = phi.profile();
    let vertices = phi.active_gradients(x)?;
    let base = &vertices[0];
    let edges: Vec<TangentVector> = vertices.iter().skip(1).map(|v| v.add_scaled(-1.0, base)).collect();
    let slopes: Vec<TangentVector> = if edges.is_empty() {
        vertices.clone()
    } else {
        let centre = edges.iter().fold(base.clone(), |acc, e| acc.add_scaled(1.0 / vertices.len() as f64, e));
        let mut slopes: Vec<TangentVector> = edges.iter().flat_map(|e| [0.25, 0.5, 0.75].map(|t| base.add_scaled(t, e))).collect();
        slopes.push(centre);
        slopes
    };
    let step = 1.75 * grid.spacing();
    let phi_x = phi.value(x);
    let deficit_at = |y: &SpherePoint| phi_x + profile.eval(x, y) - land.min_h(y.coords());
    let mut smallest = f64::INFINITY;
    for p in &slopes {
        let y = c_exp(profile, p)?;
        // directions along the target set, by differencing the c-exponential
        let along: Vec<Vec<f64>> = edges
            .iter()
            .map(|e| Ok(log_map(&y, &c_exp(profile, &p.add_scaled(1e-5, e))?)?.vec().to_vec()))
            .collect::<Result<_>>()?;
        for n in fan(&normal_directions(&y, along)) {
            let pair = [1.0, -1.0].map(|s| deficit_at(&exp_map(&n.scale(s * step))));
            smallest = smallest.min(pair[0].min(pair[1]));
        }
    }
    Ok(if smallest.is_finite() { floor.max(smallest) } else { floor })
}

/// Directions spread over the span of an orthonormal set: eight angles in
/// the plane of every pair of axes.
fn fan(axes: &[TangentVector]) -> Vec<TangentVector> {
    if axes.len() < 2 {
        return axes.to_vec();
    }
    let mut out = Vec::new();
    for i in 0..axes.len() {
        for j in i + 1..axes.len() {
            for k in 0..8 {
                let angle = k as f64 * core::f64::consts::PI / 8.0;
                out.push(axes[i].scale(angle.cos()).add_scaled(angle.sin(), &axes[j]));
            }
        }
    }
    out
}

/// Orthonormal tangent directions at `y` completing the span of `along`.
fn normal_directions(y: &SpherePoint, along: Vec<Vec<f64>>) -> Vec<TangentVector> {
    let n = y.dim();
    let given = along.len();
    let basis = (0..n).map(|k| {
        let mut e = alloc::vec![0.0; n];
        e[k] = 1.0;
        TangentVector::project(y, &e).vec().to_vec()
    });
    let mut span: Vec<Vec<f64>> = Vec::new();
    let mut out = Vec::new();
    for (k, mut v) in along.into_iter().chain(basis).enumerate() {
        let length = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        for s in core::iter::once(y.coords()).chain(span.iter().map(Vec::as_slice)) {
            let dot: f64 = v.iter().zip(s).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(s).for_each(|(a, b)| *a -= dot * b);
        }
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm <= 1e-6 * length || norm == 0.0 {
            continue;
        }
        v.iter_mut().for_each(|a| *a /= norm);
        if k >= given {
            out.push(TangentVector::project(y, &v));
        }
        span.push(v);
        if span.len() == n - 1 {
            break;
        }
    }
    out
}

/// Points where two branches of `φ` tie and dominate the others, found by
/// bisection along every grid edge whose endpoints have different winning
/// supports.
pub fn ridge_samples(phi: &CConvexPotential, grid: &SphereGrid) -> Vec<SpherePoint> {
    ridge_samples_paired(phi, grid).into_iter().map(|(p, _, _)| p).collect()
}

/// Ridge samples with the pair of branches tying there.
pub(crate) fn ridge_samples_paired(phi: &CConvexPotential, grid: &SphereGrid) -> Vec<(SpherePoint, usize, usize)> {
    let winners = par::map_indexed(grid.len(), |k| {
        let x = grid.coords(k);
        (0..phi.supports.len()).map(|i| (phi.branch_flat(i, x), i)).fold((f64::NEG_INFINITY, 0), |a, b| if b.0 > a.0 { b } else { a }).1
    });
    let edges: Vec<(usize, usize)> = (0..grid.len())
        .flat_map(|k| grid.neighbours(k).iter().map(move |&j| (k, j as usize)))
        .filter(|&(k, j)| k < j && winners[k] != winners[j])
        .collect();
    par::map_indexed(edges.len(), |e| {
        let (k, j) = edges[e];
        let (i, l) = (winners[k], winners[j]);
        let p = super::ridge_point(phi, i, l, grid.point(k), grid.point(j)).ok()?;
        let ev = phi.evaluate_with(&p, 1e-9);
        (ev.active.contains(&i) && ev.active.contains(&l)).then_some((p, i, l))
    })
    .into_iter()
    .flatten()
    .collect()
}

/// Grid points `y` for which `x` minimises `φ + c(·, y)` up to `tol`.
///
/// The minimum is taken over the grid, the ridge samples of `φ` and `x`
/// itself. Minimisers of `φ + c(·, y)` sit on the ridges, where the function
/// has a kink; sampling the ridges exactly keeps the discrete minimum
/// within second order of the true one.
pub fn contact_set(phi: &CConvexPotential, x: &SpherePoint, grid: &SphereGrid, tol: f64) -> ContactSet {
    let profile = phi.profile();
    let land = Landscape::new(phi, grid, x);
    let phi_x = phi.value(x);
    let flags = par::map_indexed(grid.len(), |j| {
        let y = grid.coords(j);
        let hx = phi_x + profile.f(flat_distance(x.coords(), y));
        hx.is_finite() && !land.undercuts(y, hx - tol)
    });
    let members: Vec<usize> = flags.iter().enumerate().filter(|(_, &m)| m).map(|(j, _)| j).collect();
    ContactSet { x: x.clone(), is_full_sphere: members.len() == grid.len(), members, tol }
}

/// Largest distance from a point of `from` to the nearest point of `to`.
pub fn directed_hausdorff(from: &[SpherePoint], to: &[SpherePoint]) -> f64 {
    if to.is_empty() {
        return if from.is_empty() { 0.0 } else { f64::INFINITY };
    }
    from.iter().map(|p| to.iter().map(|q| distance(p, q)).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max)
}

/// Symmetric Hausdorff distance between a point set and a sampled curve.
pub fn hausdorff_to_segment(points: &[SpherePoint], segment: &[SpherePoint]) -> f64 {
    if points.is_empty() || segment.is_empty() {
        return f64::INFINITY;
    }
    directed_hausdorff(points, segment).max(directed_hausdorff(segment, points))
}

/// A sampled slope whose c-exponential is not a global grid minimiser.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Witness {
    pub p: TangentVector,
    pub y: SpherePoint,
    /// Grid point where `φ + c(·, y)` undercuts its value at `x`.
    pub better: usize,
    pub deficit: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SubdiffVerification {
    pub passed: bool,
    pub checked: usize,
    /// Largest `φ(x) + c(x, y) − min(φ + c(·, y))` over the samples.
    pub worst_deficit: f64,
    pub witness: Option<Witness>,
}

/// `h_y(x) − min over grid ∪ {x} of h_y` with `h_y = φ + c(·, y)`, and the
/// grid index attaining the minimum.
fn deficit(profile: &CostProfile, phi_grid: &[f64], grid: &SphereGrid, phi_x: f64, x: &SpherePoint, y: &SpherePoint) -> (f64, usize) {
    let hx = phi_x + profile.eval(x, y);
    let (best, arg) = (0..grid.len())
        .map(|i| (phi_grid[i] + profile.f(flat_distance(grid.coords(i), y.coords())), i))
        .fold((f64::INFINITY, usize::MAX), |a, b| if b.0 < a.0 { b } else { a });
    ((hx - best).max(0.0), arg)
}

/// Checks `∂φ(x) ⊂ ∂^c φ(x)` on a sample of the subdifferential: every
/// sampled slope `p` must send `y = c-exp_x(p)` to a target for which `x`
/// minimises `φ + c(·, y)` over the grid, up to `tol`.
pub fn verify_subdiff_eq_csubdiff<P: Potential + ?Sized>(phi: &P, x: &SpherePoint, grid: &SphereGrid, tol: f64) -> Result<SubdiffVerification> {
    for y in phi.active_targets(x) {
        if distance(x, &y) >= core::f64::consts::PI - ANTIPODAL_MARGIN {
            return Err(Error::AntipodalEndpoint);
        }
    }
    let profile = phi.profile();
    let hull = Subdifferential { x: x.clone(), vertices: phi.active_gradients(x)? };
    let samples = hull.sample(7);
    let phi_grid = par::map_indexed(grid.len(), |k| phi.value(grid.point(k)));
    let phi_x = phi.value(x);
    let mut worst: Option<Witness> = None;
    for p in &samples {
        let y = c_exp(profile, p)?;
        let (d, better) = deficit(profile, &phi_grid, grid, phi_x, x, &y);
        if worst.as_ref().is_none_or(|w| d > w.deficit) {
            worst = Some(Witness { p: p.clone(), y, better, deficit: d });
        }
    }
    let worst_deficit = worst.as_ref().map_or(0.0, |w| w.deficit);
    let passed = worst_deficit <= tol;
    Ok(SubdiffVerification { passed, checked: samples.len(), worst_deficit, witness: worst.filter(|_| !passed) })
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MidpointCheck {
    pub pairs: usize,
    pub worst_deficit: f64,
    pub passed: bool,
}

/// Convexity of the pulled-back contact set: for pairs of members, the
/// c-exponential of the midpoint of their slopes must again be a contact
/// target of `x` within `tol`.
pub fn pullback_midpoint_check(phi: &CConvexPotential, contact: &ContactSet, grid: &SphereGrid, max_pairs: usize, tol: f64) -> Result<MidpointCheck> {
    let profile = phi.profile();
    let x = &contact.x;
    let slopes: Vec<TangentVector> =
        contact.members.iter().map(|&j| minus_grad_x(profile, x, grid.point(j))).collect::<Result<_>>()?;
    let m = slopes.len();
    let mut pairs = Vec::new();
    'outer: for gap in (1..m).rev() {
        for i in 0..m - gap {
            if pairs.len() >= max_pairs {
                break 'outer;
            }
            pairs.push((i, i + gap));
        }
    }
    let phi_grid = phi.on_grid(grid);
    let phi_x = phi.value(x);
    let deficits = par::map_indexed(pairs.len(), |k| -> Result<f64> {
        let (i, j) = pairs[k];
        let y = c_exp(profile, &slopes[i].lerp(&slopes[j], 0.5))?;
        Ok(deficit(profile, &phi_grid, grid, phi_x, x, &y).0)
    });
    let worst_deficit = deficits.into_iter().collect::<Result<Vec<_>>>()?.into_iter().fold(0.0, f64::max);
    Ok(MidpointCheck { pairs: pairs.len(), worst_deficit, passed: worst_deficit <= tol })
}
