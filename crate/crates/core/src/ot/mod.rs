//! Discrete optimal transport between finitely supported measures: an
//! exact transportation simplex, an entropic solver with exact rounding,
//! map extraction and optimality certificates.
//!
//! Duals follow the convention `φ_i + φ^c_j ≥ −c(x_i, y_j)` with equality
//! on the support of an optimal plan, normalised by `φ_0 = 0`.

mod entropic;
mod measure;
mod simplex;

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

pub use measure::{DiscreteMeasure, MERGE_RADIUS};
pub use simplex::CostMatrix;

use crate::cconvex::{CConvexPotential, Support};
use crate::cost::{CostProfile, PairCost};
use crate::error::{Error, Result};
use crate::par;
use crate::sphere::{distance, SpherePoint};
use crate::tolerance::Tolerances;

/// Largest support size accepted by [`solve_exact`].
pub const EXACT_LIMIT: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PlanEntry {
    pub i: usize,
    pub j: usize,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TransportPlan {
    pub source: DiscreteMeasure,
    pub target: DiscreteMeasure,
    /// Positive entries in row-major order.
    pub entries: Vec<PlanEntry>,
    pub dual_phi: Vec<f64>,
    pub dual_phic: Vec<f64>,
    pub total_cost: f64,
}

/// Costs between all source and target points; pairs at or beyond the cut
/// of the profile are `+∞`.
pub fn cost_matrix(profile: &CostProfile, source: &DiscreteMeasure, target: &DiscreteMeasure) -> CostMatrix {
    let (rows, cols) = (source.len(), target.len());
    let values = par::map_indexed(rows * cols, |k| {
        let d = distance(&source.points()[k / cols], &target.points()[k % cols]);
        if profile.check_admissible(d).is_ok() {
            profile.f(d)
        } else {
            f64::INFINITY
        }
    });
    CostMatrix { rows, cols, values }
}

fn check_dims(source: &DiscreteMeasure, target: &DiscreteMeasure) -> Result<()> {
    if source.dim() != target.dim() {
        return Err(Error::DimensionMismatch { expected: source.dim(), found: target.dim() });
    }
    Ok(())
}

fn normalised_duals(mut phi: Vec<f64>, mut phic: Vec<f64>) -> (Vec<f64>, Vec<f64>) {
    let shift = phi[0];
    phi.iter_mut().for_each(|p| *p -= shift);
    phic.iter_mut().for_each(|p| *p += shift);
    (phi, phic)
}

/// Exact optimal coupling with duals read off the optimal basis.
pub fn solve_exact(source: &DiscreteMeasure, target: &DiscreteMeasure, profile: &CostProfile) -> Result<TransportPlan> {
    check_dims(source, target)?;
    if source.len() > EXACT_LIMIT || target.len() > EXACT_LIMIT {
        return Err(Error::TooLarge(alloc::format!(
            "exact solver accepts at most {EXACT_LIMIT} points per side, got {} and {}",
            source.len(),
            target.len()
        )));
    }
    let cost = cost_matrix(profile, source, target);
    let solution = simplex::solve(source.weights(), target.weights(), &cost)?;
    let support = Tolerances::default().plan_support;
    let mut entries: Vec<PlanEntry> =
        solution.basis.iter().filter(|&&(_, _, mass)| mass > support).map(|&(i, j, mass)| PlanEntry { i, j, mass }).collect();
    entries.sort_by_key(|e| (e.i, e.j));
    if let Some(e) = entries.iter().find(|e| !cost.at(e.i, e.j).is_finite()) {
        return Err(Error::CutLocus {
            distance: distance(&source.points()[e.i], &target.points()[e.j]),
            cut: profile.domain_cut(),
        });
    }
    let total_cost = entries.iter().map(|e| e.mass * cost.at(e.i, e.j)).sum();
    let (dual_phi, dual_phic) = normalised_duals(solution.u.iter().map(|u| -u).collect(), solution.v.iter().map(|v| -v).collect());
    Ok(TransportPlan { source: source.clone(), target: target.clone(), entries, dual_phi, dual_phic, total_cost })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EntropicSolve {
    /// Rounded plan: its marginals are exact up to rounding error.
    pub plan: TransportPlan,
    pub iterations: usize,
    /// L1 row-marginal error of the scaling iterate before rounding.
    pub residual: f64,
    pub converged: bool,
}

/// Entropic coupling at regularisation `eps`, with at most `rounds`
/// scaling sweeps. A run that does not converge is still rounded and
/// returned, flagged.
pub fn solve_entropic(source: &DiscreteMeasure, target: &DiscreteMeasure, profile: &CostProfile, eps: f64, rounds: usize) -> Result<EntropicSolve> {
    check_dims(source, target)?;
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::domain(alloc::format!("regularisation must be positive, got {eps}")));
    }
    let cost = cost_matrix(profile, source, target);
    let outcome = entropic::scale(source.weights(), target.weights(), &cost, eps, rounds.max(1), Tolerances::default().sinkhorn);
    let n = target.len();
    let support = Tolerances::default().plan_support;
    let entries: Vec<PlanEntry> = outcome
        .plan
        .iter()
        .enumerate()
        .filter(|&(_, &mass)| mass > support)
        .map(|(k, &mass)| PlanEntry { i: k / n, j: k % n, mass })
        .collect();
    let total_cost = entries.iter().map(|e| e.mass * cost.at(e.i, e.j)).sum();
    let (dual_phi, dual_phic) = normalised_duals(outcome.f.iter().map(|f| -f).collect(), outcome.g.iter().map(|g| -g).collect());
    Ok(EntropicSolve {
        plan: TransportPlan { source: source.clone(), target: target.clone(), entries, dual_phi, dual_phic, total_cost },
        iterations: outcome.iterations,
        residual: outcome.residual,
        converged: outcome.converged,
    })
}

impl TransportPlan {
    /// Largest absolute deviation of a row or column sum from its marginal.
    pub fn marginal_residual(&self) -> f64 {
        let mut rows = alloc::vec![0.0; self.source.len()];
        let mut cols = alloc::vec![0.0; self.target.len()];
        for e in &self.entries {
            rows[e.i] += e.mass;
            cols[e.j] += e.mass;
        }
        let dev = |sums: &[f64], w: &[f64]| sums.iter().zip(w).map(|(s, w)| (s - w).abs()).fold(0.0, f64::max);
        dev(&rows, self.source.weights()).max(dev(&cols, self.target.weights()))
    }

    /// `total_cost + Σ φ dμ₀ + Σ φ^c dμ₁`, zero under strong duality.
    pub fn duality_gap(&self) -> f64 {
        let primal = self.total_cost;
        let dual: f64 = self.dual_phi.iter().zip(self.source.weights()).map(|(p, w)| p * w).sum::<f64>()
            + self.dual_phic.iter().zip(self.target.weights()).map(|(p, w)| p * w).sum::<f64>();
        primal + dual
    }

    /// Smallest `φ_i + φ^c_j + c(x_i, y_j)` over admissible pairs; dual
    /// feasibility asks for it to be nonnegative.
    pub fn dual_feasibility(&self, profile: &CostProfile) -> f64 {
        let cost = cost_matrix(profile, &self.source, &self.target);
        let n = self.target.len();
        par::map_indexed(self.source.len(), |i| {
            (0..n).filter(|&j| cost.at(i, j).is_finite()).map(|j| self.dual_phi[i] + self.dual_phic[j] + cost.at(i, j)).fold(f64::INFINITY, f64::min)
        })
        .into_iter()
        .fold(f64::INFINITY, f64::min)
    }

    /// Largest `|φ_i + φ^c_j + c(x_i, y_j)|` over the support of the plan.
    pub fn slackness_violation(&self, profile: &CostProfile) -> f64 {
        self.entries
            .iter()
            .map(|e| (self.dual_phi[e.i] + self.dual_phic[e.j] + profile.eval(&self.source.points()[e.i], &self.target.points()[e.j])).abs())
            .fold(0.0, f64::max)
    }

    /// Source and target points of every positive entry.
    pub fn support_pairs(&self) -> Vec<(SpherePoint, SpherePoint)> {
        self.entries.iter().map(|e| (self.source.points()[e.i].clone(), self.target.points()[e.j].clone())).collect()
    }

    /// The c-convex extension `max_j { −φ^c_j − c(·, y_j) }` of the source
    /// dual, which agrees with `φ` on the source points of an optimal plan.
    pub fn dual_potential(&self, profile: &CostProfile) -> Result<CConvexPotential> {
        let supports = self.target.points().iter().zip(&self.dual_phic).map(|(y, p)| Support { y: y.clone(), a: -p }).collect();
        CConvexPotential::new(profile.clone(), supports)
    }
}

/// Single-valued reading of a plan: the target of each concentrated row.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TransportMap {
    /// `None` marks a split row.
    pub assignment: Vec<Option<usize>>,
}

impl TransportMap {
    pub fn split_rows(&self) -> usize {
        self.assignment.iter().filter(|a| a.is_none()).count()
    }

    pub fn is_total(&self) -> bool {
        self.split_rows() == 0
    }

    /// Images of all source points, when no row is split.
    pub fn images(&self, target: &DiscreteMeasure) -> Option<Vec<SpherePoint>> {
        self.assignment.iter().map(|a| a.map(|j| target.points()[j].clone())).collect()
    }
}

/// Rows holding at least `1 − 1e−6` of their mass on one target map to it;
/// the others are flagged as split.
pub fn extract_map(plan: &TransportPlan) -> TransportMap {
    let threshold = 1.0 - Tolerances::default().split_row;
    let mut best = alloc::vec![(0.0, usize::MAX); plan.source.len()];
    for e in &plan.entries {
        if e.mass > best[e.i].0 {
            best[e.i] = (e.mass, e.j);
        }
    }
    let assignment = best.iter().zip(plan.source.weights()).map(|(&(mass, j), &w)| (j != usize::MAX && mass >= threshold * w).then_some(j)).collect();
    TransportMap { assignment }
}

/// Worst violation of the gradient relation on unsplit rows: `T(x_i)` must
/// be an active support of the dual potential at `x_i`, so that
/// `−∇_x c(x_i, T(x_i)) ∈ ∂φ(x_i)`. Also covers the agreement of the
/// potential with the dual values.
pub fn gradient_relation_gap(plan: &TransportPlan, map: &TransportMap, profile: &CostProfile) -> Result<f64> {
    let phi = plan.dual_potential(profile)?;
    let mut worst: f64 = 0.0;
    for (i, slot) in map.assignment.iter().enumerate() {
        let Some(j) = *slot else { continue };
        let x = &plan.source.points()[i];
        let value = phi.value(x);
        let branch = -plan.dual_phic[j] - profile.eval(x, &plan.target.points()[j]);
        worst = worst.max(value - branch).max((value - plan.dual_phi[i]).abs());
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MonotoneCheck {
    /// Smallest `c(x₂,T(x₁)) + c(x₁,T(x₂)) − c(x₁,T(x₁)) − c(x₂,T(x₂))`.
    pub worst_margin: f64,
    pub worst_pair: Option<(usize, usize)>,
    pub passed: bool,
}

/// 2-monotonicity of a set of source/target pairs.
pub fn check_c_monotone<C: PairCost + ?Sized>(pairs: &[(SpherePoint, SpherePoint)], cost: &C) -> MonotoneCheck {
    let diag: Vec<f64> = pairs.iter().map(|(x, y)| cost.pair_cost(x, y)).collect();
    let rows = par::map_indexed(pairs.len(), |a| {
        (a + 1..pairs.len())
            .map(|b| {
                let swapped = cost.pair_cost(&pairs[b].0, &pairs[a].1) + cost.pair_cost(&pairs[a].0, &pairs[b].1);
                let margin = swapped - diag[a] - diag[b];
                (if margin.is_nan() { f64::NEG_INFINITY } else { margin }, b)
            })
            .fold((f64::INFINITY, usize::MAX), |acc, m| if m.0 < acc.0 { m } else { acc })
    });
    let (worst_margin, worst_pair) = rows
        .into_iter()
        .enumerate()
        .fold((f64::INFINITY, None), |acc, (a, (m, b))| if m < acc.0 { (m, Some((a, b))) } else { acc });
    MonotoneCheck { worst_margin, worst_pair, passed: worst_margin >= -Tolerances::default().monotone_margin }
}

/// `max_B |μ₁(B) − μ₀(T⁻¹(B))|` over the closed balls of the given radius
/// centred at every source and target point.
pub fn pushforward_check(images: &[SpherePoint], source: &DiscreteMeasure, target: &DiscreteMeasure, radius: f64) -> Result<f64> {
    if images.len() != source.len() {
        return Err(Error::DimensionMismatch { expected: source.len(), found: images.len() });
    }
    let centres: Vec<&SpherePoint> = source.points().iter().chain(target.points()).collect();
    let gaps = par::map_indexed(centres.len(), |k| {
        let c = centres[k];
        let pulled: f64 = images.iter().zip(source.weights()).filter(|(y, _)| distance(y, c) <= radius).map(|(_, w)| w).sum();
        (target.ball_mass(c, radius) - pulled).abs()
    });
    Ok(gaps.into_iter().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests;
