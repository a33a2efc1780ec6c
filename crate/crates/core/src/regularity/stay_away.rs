//! Stay-away margin from the cut locus, its measure-theoretic lower bound,
//! the pairwise distance inequality and the mass bound on discrete maps.

use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use super::growth::cumulative_ball_masses;
use super::RADIUS_RATIO;
use crate::error::{Error, Result};
use crate::grid::{sphere_area, SphereGrid};
use crate::ot::{DiscreteMeasure, TransportPlan};
use crate::par;
use crate::sampling::{random_point, stream_rng};
use crate::sphere::{distance, fibonacci_grid, SpherePoint};
use crate::tolerance::Tolerances;

/// Hemisphere centres probed for `inf_z μ(D_z)`.
const HEMISPHERE_PROBES: usize = 2000;
/// Extra ball centres added to the support points.
const BALL_PROBES: usize = 512;
/// Largest radius of the σ grid; balls of radius `4r` then cover the sphere.
const SIGMA_TOP: f64 = PI / 4.0;
/// The σ grid stops below this radius.
const SIGMA_FLOOR: f64 = 1e-4;
/// Radius range of the random balls `ω` in the mass bound.
const OMEGA_RADII: (f64, f64) = (0.2, 0.8);

/// Variables in which a map is expressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Convention {
    /// Quadratic or reduced antenna variables: margin `π − d(x, T(x))`.
    Reduced,
    /// Original antenna variables `y ↦ −y`: margin `d(x, T(x))`.
    OriginalAntenna,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StayAwayReport {
    pub convention: Convention,
    pub sigma_observed: f64,
    pub sigma_lower_bound: f64,
    pub argmin_x: SpherePoint,
    pub argmin_y: SpherePoint,
    pub pairs: usize,
}

/// Smallest margin over `(x, T(x))` pairs given in the stated convention,
/// with the index of the pair attaining it.
pub fn observed_margin(pairs: &[(SpherePoint, SpherePoint)], convention: Convention) -> (f64, usize) {
    pairs
        .iter()
        .map(|(x, y)| match convention {
            Convention::Reduced => PI - distance(x, y),
            Convention::OriginalAntenna => distance(x, y),
        })
        .enumerate()
        .fold((f64::INFINITY, 0), |best, (k, m)| if m < best.0 { (m, k) } else { best })
}

/// Stay-away report for every support pair of a plan solved in reduced
/// variables. Under [`Convention::OriginalAntenna`] targets are mapped to
/// original variables first.
pub fn stay_away(plan: &TransportPlan, convention: Convention) -> Result<StayAwayReport> {
    let mut pairs = plan.support_pairs();
    if pairs.is_empty() {
        return Err(Error::domain("plan has no support"));
    }
    if convention == Convention::OriginalAntenna {
        pairs.iter_mut().for_each(|(_, y)| *y = y.antipode());
    }
    let (sigma_observed, k) = observed_margin(&pairs, convention);
    let (argmin_x, argmin_y) = pairs.swap_remove(k);
    Ok(StayAwayReport {
        convention,
        sigma_observed,
        sigma_lower_bound: sigma_lower_bound(&plan.source, &plan.target)?,
        argmin_x,
        argmin_y,
        pairs: plan.entries.len(),
    })
}

/// `inf_z μ(D_z)` over a Fibonacci grid of hemisphere centres `z`, where
/// `D_z = {y : y·z ≥ 0}`, with the minimising centre.
pub fn hemisphere_infimum(mu: &DiscreteMeasure, probes: usize) -> Result<(f64, SpherePoint)> {
    let centres = fibonacci_grid(mu.dim(), probes.max(1))?;
    let masses = par::map_indexed(centres.len(), |c| {
        let z = &centres[c];
        mu.points().iter().zip(mu.weights()).filter(|(p, _)| p.dot(z) >= 0.0).map(|(_, w)| w).sum::<f64>()
    });
    let (k, m) = masses.iter().copied().enumerate().fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
    Ok((m, centres[k].clone()))
}

fn sigma_radii() -> Vec<f64> {
    let mut radii = Vec::new();
    let mut r = SIGMA_TOP;
    while r >= SIGMA_FLOOR {
        radii.push(r);
        r /= RADIUS_RATIO;
    }
    radii.reverse();
    radii
}

/// Smallest grid radius `r` such that some ball `B_{4r}(x)` carries
/// `μ0`-mass at least `mass`. Non-decreasing in `mass`.
pub fn sigma_for_mass(mu0: &DiscreteMeasure, mass: f64) -> Result<f64> {
    let radii = sigma_radii();
    let thresholds: Vec<f64> = radii.iter().map(|r| (2.0 * (2.0 * r).min(0.5 * PI).sin()).powi(2)).collect();
    let mut centres: Vec<SpherePoint> = mu0.points().to_vec();
    centres.extend(fibonacci_grid(mu0.dim(), BALL_PROBES)?);
    let first = par::map_indexed(centres.len(), |c| {
        let masses = cumulative_ball_masses(mu0, &centres[c], &thresholds);
        masses.iter().position(|&m| m >= mass - 1e-12).unwrap_or(radii.len() - 1)
    });
    Ok(radii[first.into_iter().min().unwrap_or(radii.len() - 1)])
}

/// Lower bound for the stay-away margin: the hemisphere infimum of `μ1`
/// fed into [`sigma_for_mass`] for `μ0`.
pub fn sigma_lower_bound(mu0: &DiscreteMeasure, mu1: &DiscreteMeasure) -> Result<f64> {
    let (mass, _) = hemisphere_infimum(mu1, HEMISPHERE_PROBES)?;
    sigma_for_mass(mu0, mass)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DelLoepReport {
    pub pairs: usize,
    /// Smallest `RHS − LHS` over the checked pairs.
    pub min_margin: f64,
    pub worst: Option<(usize, usize)>,
    pub passed: bool,
}

/// Checks `d(T x₂, −x₁) ≤ 2π·d(T x₁, −x₁)/d(x₁, x₂)` on ordered pairs of
/// distinct points: all of them when there are at most `max_pairs`,
/// otherwise `max_pairs` seeded random pairs.
pub fn lemma_del_loep_check(source: &[SpherePoint], images: &[SpherePoint], max_pairs: usize, seed: u64) -> Result<DelLoepReport> {
    if source.len() != images.len() {
        return Err(Error::DimensionMismatch { expected: source.len(), found: images.len() });
    }
    let n = source.len();
    let pairs: Vec<(usize, usize)> = if n * n.saturating_sub(1) <= max_pairs {
        (0..n).flat_map(|a| (0..n).filter(move |&b| b != a).map(move |b| (a, b))).collect()
    } else {
        let mut rng = stream_rng(seed, 0);
        (0..max_pairs)
            .map(|_| {
                let a = rng.random_range(0..n);
                let b = (a + rng.random_range(1..n)) % n;
                (a, b)
            })
            .collect()
    };
    let margins = par::map_indexed(pairs.len(), |k| {
        let (a, b) = pairs[k];
        let apart = distance(&source[a], &source[b]);
        if apart == 0.0 {
            return f64::INFINITY;
        }
        let antipode = source[a].antipode();
        2.0 * PI * distance(&images[a], &antipode) / apart - distance(&images[b], &antipode)
    });
    let (k, min_margin) = margins.iter().copied().enumerate().fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
    Ok(DelLoepReport {
        pairs: pairs.len(),
        min_margin,
        worst: pairs.get(k).copied().filter(|_| min_margin.is_finite()),
        passed: min_margin >= -Tolerances::default().del_loep_slack,
    })
}

/// Voronoi ownership of reference points by a set of sites: for each
/// reference point the id of its nearest distinct site, and for each site
/// its distinct id.
fn voronoi(reference: &SphereGrid, sites: &[SpherePoint]) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut order: Vec<usize> = (0..sites.len()).collect();
    order.sort_by(|&a, &b| {
        sites[a].coords().iter().zip(sites[b].coords()).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(core::cmp::Ordering::Equal)
    });
    let mut id = alloc::vec![0; sites.len()];
    let mut distinct: Vec<SpherePoint> = Vec::new();
    for &s in &order {
        if distinct.last().is_none_or(|d| d.chord(&sites[s]) > 1e-12) {
            distinct.push(sites[s].clone());
        }
        id[s] = distinct.len() - 1;
    }
    let grid = SphereGrid::from_points(distinct)?;
    let owner = par::map_indexed(reference.len(), |r| grid.nearest(reference.point(r)).0);
    Ok((owner, id))
}

/// Largest `m` with `μ(y_j) ≥ m·Vol(cell_j)` for every support point,
/// where cell volumes are reference-cloud Voronoi weights.
pub fn density_floor(mu: &DiscreteMeasure, reference: &SphereGrid) -> Result<f64> {
    let (owner, id) = voronoi(reference, mu.points())?;
    let cell = sphere_area(reference.dim()) / reference.len() as f64;
    let mut volume = alloc::vec![0.0; id.iter().max().map_or(0, |m| m + 1)];
    owner.iter().for_each(|&o| volume[o] += cell);
    let mut mass = alloc::vec![0.0; volume.len()];
    id.iter().zip(mu.weights()).for_each(|(&i, w)| mass[i] += w);
    Ok(mass.iter().zip(&volume).map(|(m, v)| if *v > 0.0 { m / v } else { f64::INFINITY }).fold(f64::INFINITY, f64::min))
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MassBoundReport {
    pub checks: usize,
    /// Smallest `μ0(ω) − m·Vol(T(ω)) + slack`.
    pub worst_margin: f64,
    /// Smallest `μ0(ω)/(m·Vol(T(ω)))` over balls with nonzero image volume.
    pub worst_ratio: f64,
    /// Quadrature slack of the worst ball.
    pub worst_slack: f64,
    pub worst_centre: SpherePoint,
    pub worst_radius: f64,
    pub passed: bool,
}

/// Checks `μ0(ω) ≥ m·Vol(T(ω)) − slack` over `omegas` seeded random balls.
/// `Vol(T(ω))` is the reference-cloud volume of the Voronoi cells, among
/// all images, of the images of points in `ω`; the slack is `m` times the
/// reference volume of boundary cells of that region.
pub fn mass_bound_check(
    source: &DiscreteMeasure,
    images: &[SpherePoint],
    m: f64,
    reference: &SphereGrid,
    omegas: usize,
    seed: u64,
) -> Result<MassBoundReport> {
    if source.len() != images.len() {
        return Err(Error::DimensionMismatch { expected: source.len(), found: images.len() });
    }
    let (owner, id) = voronoi(reference, images)?;
    let cell = sphere_area(reference.dim()) / reference.len() as f64;
    let distinct = id.iter().max().map_or(0, |m| m + 1);
    let rows = par::map_indexed(omegas, |k| {
        let mut rng = stream_rng(seed, k as u64);
        let centre = random_point(&mut rng, source.dim());
        let radius = rng.random_range(OMEGA_RADII.0..OMEGA_RADII.1);
        let mut selected = alloc::vec![false; distinct];
        let mut mass = 0.0;
        for ((p, w), &i) in source.points().iter().zip(source.weights()).zip(&id) {
            if distance(p, &centre) <= radius {
                mass += w;
                selected[i] = true;
            }
        }
        let inside = |r: usize| selected[owner[r]];
        let (mut count, mut boundary) = (0usize, 0usize);
        for r in 0..reference.len() {
            if inside(r) {
                count += 1;
                if reference.neighbours(r).iter().any(|&q| !inside(q as usize)) {
                    boundary += 1;
                }
            }
        }
        let volume = cell * count as f64;
        let slack = m * cell * boundary as f64;
        let ratio = if volume > 0.0 { mass / (m * volume) } else { f64::INFINITY };
        (mass - m * volume + slack, ratio, slack, centre, radius)
    });
    let worst = rows.iter().fold(None, |best: Option<&(f64, f64, f64, SpherePoint, f64)>, row| match best {
        Some(b) if b.0 <= row.0 => Some(b),
        _ => Some(row),
    });
    let worst_ratio = rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let Some((worst_margin, _, worst_slack, centre, radius)) = worst.cloned() else {
        return Err(Error::domain("mass_bound_check needs at least one ball"));
    };
    Ok(MassBoundReport {
        checks: omegas,
        worst_margin,
        worst_ratio,
        worst_slack,
        worst_centre: centre,
        worst_radius: radius,
        passed: worst_margin >= 0.0,
    })
}
