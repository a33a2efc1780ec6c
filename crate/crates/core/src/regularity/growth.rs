//! Empirical ball-mass growth `sup_x μ(B_ε(x))/ε^k` over a radius grid.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use super::RADIUS_RATIO;
use crate::error::{Error, Result};
use crate::ot::DiscreteMeasure;
use crate::par;
use crate::sphere::{fibonacci_grid, SpherePoint};

/// Extra probe centres added to the support points.
const PROBE_CENTRES: usize = 512;

/// Log-log slope separating growth regimes: above `−SLOPE_LIMIT` the ratio
/// stays bounded as `ε → 0`, above `+SLOPE_LIMIT` it vanishes.
pub const SLOPE_LIMIT: f64 = 0.5;

/// The two growth conditions on a source measure.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum GrowthCondition {
    /// `μ(B_ε) ≤ C ε^{d(1−1/p)}`; `p = ∞` is allowed.
    A { p: f64 },
    /// `μ(B_ε) ≤ f(ε) ε^{d−1}` with `f(ε) → 0`.
    B,
}

impl GrowthCondition {
    /// Exponent for intrinsic dimension `d`.
    pub fn exponent(&self, intrinsic_dim: usize) -> f64 {
        let d = intrinsic_dim as f64;
        match *self {
            GrowthCondition::A { p } => d * (1.0 - 1.0 / p),
            GrowthCondition::B => d - 1.0,
        }
    }

    /// Whether a measured log-log slope of the sup ratio is consistent
    /// with the condition: bounded for `A`, vanishing for `B`.
    pub fn holds_for_slope(&self, slope: f64) -> bool {
        match self {
            GrowthCondition::A { .. } => slope > -SLOPE_LIMIT,
            GrowthCondition::B => slope > SLOPE_LIMIT,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GrowthRow {
    pub radius: f64,
    /// `sup_x μ(B_radius(x)) / radius^exponent`.
    pub sup_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GrowthConditionReport {
    pub dimension_exponent: f64,
    /// Supremum of the ratio over all centres and radii.
    pub constant: f64,
    pub radii: Vec<f64>,
    pub rows: Vec<GrowthRow>,
    pub worst_x: SpherePoint,
    pub worst_radius: f64,
    /// Least-squares slope of `log sup_ratio` against `log radius`.
    pub log_slope: f64,
}

impl GrowthConditionReport {
    /// The ratio does not blow up as the radius shrinks.
    pub fn bounded(&self) -> bool {
        self.log_slope > -SLOPE_LIMIT
    }

    /// Largest relative spread of the per-radius ratios around their mean.
    pub fn spread(&self) -> f64 {
        let mean = self.rows.iter().map(|r| r.sup_ratio).sum::<f64>() / self.rows.len() as f64;
        self.rows.iter().fold(0.0, |m, r| m.max((r.sup_ratio - mean).abs() / mean))
    }
}

/// Geometric radii with ratio `2^{1/4}` from `smallest` up to at most
/// `largest`.
pub fn radius_grid(smallest: f64, largest: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut r = smallest;
    while r <= largest * (1.0 + 1e-12) {
        out.push(r);
        r *= RADIUS_RATIO;
    }
    out
}

/// Per-radius supremum of `μ(B_ε(x))/ε^exponent` over the support points
/// and a Fibonacci grid of probe centres.
pub fn growth_condition(mu: &DiscreteMeasure, exponent: f64, radii: &[f64]) -> Result<GrowthConditionReport> {
    if radii.len() < 5 {
        return Err(Error::domain("growth_condition needs at least 5 radii"));
    }
    if let Some(r) = radii.iter().find(|r| !(**r > 0.0 && **r <= core::f64::consts::FRAC_PI_2 + 1e-12)) {
        return Err(Error::domain(alloc::format!("radius {r} outside (0, π/2]")));
    }
    let mut radii = radii.to_vec();
    radii.sort_by(f64::total_cmp);
    let mut centres: Vec<SpherePoint> = mu.points().to_vec();
    centres.extend(fibonacci_grid(mu.dim(), PROBE_CENTRES)?);
    // compare squared chords to avoid trigonometry per point
    let thresholds: Vec<f64> = radii.iter().map(|r| (2.0 * (0.5 * r).sin()).powi(2)).collect();
    let masses = par::map_indexed(centres.len(), |c| cumulative_ball_masses(mu, &centres[c], &thresholds));
    let mut rows = Vec::with_capacity(radii.len());
    let (mut constant, mut worst) = (f64::NEG_INFINITY, (0, 0));
    for (k, &r) in radii.iter().enumerate() {
        let scale = r.powf(exponent);
        let (best_c, best) =
            masses.iter().enumerate().map(|(c, m)| (c, m[k] / scale)).fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
        rows.push(GrowthRow { radius: r, sup_ratio: best });
        if best > constant {
            constant = best;
            worst = (best_c, k);
        }
    }
    let log_slope = least_squares_slope(rows.iter().map(|row| (row.radius.ln(), row.sup_ratio.ln())));
    Ok(GrowthConditionReport {
        dimension_exponent: exponent,
        constant,
        worst_x: centres[worst.0].clone(),
        worst_radius: radii[worst.1],
        radii,
        rows,
        log_slope,
    })
}

/// Masses of the closed balls with the given squared-chord thresholds
/// (sorted ascending) around `centre`.
pub(crate) fn cumulative_ball_masses(mu: &DiscreteMeasure, centre: &SpherePoint, thresholds: &[f64]) -> Vec<f64> {
    let mut bins = alloc::vec![0.0; thresholds.len() + 1];
    for (p, w) in mu.points().iter().zip(mu.weights()) {
        let chord2: f64 = p.coords().iter().zip(centre.coords()).map(|(a, b)| (a - b) * (a - b)).sum();
        bins[thresholds.partition_point(|&t| t < chord2)] += w;
    }
    let mut acc = 0.0;
    bins.truncate(thresholds.len());
    bins.iter_mut().for_each(|b| {
        acc += *b;
        *b = acc;
    });
    bins
}

fn least_squares_slope(points: impl Iterator<Item = (f64, f64)> + Clone) -> f64 {
    let n = points.clone().count() as f64;
    let (sx, sy) = points.clone().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / n, sy / n);
    let (sxy, sxx) = points.fold((0.0, 0.0), |(a, b), (x, y)| (a + (x - mx) * (y - my), b + (x - mx) * (x - mx)));
    sxy / sxx
}
