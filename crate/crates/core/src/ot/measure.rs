use alloc::format;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::sphere::SpherePoint;

/// Points closer than this (chordal) are merged on construction.
pub const MERGE_RADIUS: f64 = 1e-10;

/// Finitely supported probability measure on the sphere.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DiscreteMeasure {
    points: Vec<SpherePoint>,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    /// Weights must already sum to one up to `1e−6`; they are renormalised
    /// exactly. Coincident points are merged and their weights added.
    pub fn new(points: Vec<SpherePoint>, weights: Vec<f64>) -> Result<Self> {
        let total = Self::check(&points, &weights)?;
        if (total - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidMeasure(format!("weights sum to {total}, not 1")));
        }
        Ok(Self::merged(points, weights, total))
    }

    /// Arbitrary positive masses, scaled to total one.
    pub fn normalized(points: Vec<SpherePoint>, masses: Vec<f64>) -> Result<Self> {
        let total = Self::check(&points, &masses)?;
        if total <= 0.0 {
            return Err(Error::InvalidMeasure(format!("total mass {total} is not positive")));
        }
        Ok(Self::merged(points, masses, total))
    }

    pub fn uniform(points: Vec<SpherePoint>) -> Result<Self> {
        let n = points.len();
        Self::normalized(points, alloc::vec![1.0; n])
    }

    fn check(points: &[SpherePoint], weights: &[f64]) -> Result<f64> {
        if points.is_empty() {
            return Err(Error::InvalidMeasure("empty support".into()));
        }
        if points.len() != weights.len() {
            return Err(Error::DimensionMismatch { expected: points.len(), found: weights.len() });
        }
        let dim = points[0].dim();
        if let Some(p) = points.iter().find(|p| p.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: p.dim() });
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidMeasure(format!("weight {w} is negative or not finite")));
        }
        Ok(weights.iter().sum())
    }

    fn merged(points: Vec<SpherePoint>, weights: Vec<f64>, total: f64) -> Self {
        // sweep in order of the first coordinate; duplicates are close in it
        let mut order: Vec<usize> = (0..points.len()).collect();
        order.sort_by(|&a, &b| points[a].coords()[0].total_cmp(&points[b].coords()[0]).then(a.cmp(&b)));
        let mut owner: Vec<usize> = (0..points.len()).collect();
        for (k, &a) in order.iter().enumerate() {
            for &b in &order[k + 1..] {
                if points[b].coords()[0] - points[a].coords()[0] > MERGE_RADIUS {
                    break;
                }
                if owner[b] == b && owner[a] == a && points[a].chord(&points[b]) <= MERGE_RADIUS {
                    let (keep, drop) = if a < b { (a, b) } else { (b, a) };
                    owner[drop] = keep;
                }
            }
        }
        let mut kept_points = Vec::new();
        let mut kept_weights = Vec::new();
        let mut slot = alloc::vec![usize::MAX; points.len()];
        for i in 0..points.len() {
            let mut root = i;
            while owner[root] != root {
                root = owner[root];
            }
            if slot[root] == usize::MAX {
                slot[root] = kept_points.len();
                kept_points.push(points[root].clone());
                kept_weights.push(0.0);
            }
            kept_weights[slot[root]] += weights[i] / total;
        }
        Self { points: kept_points, weights: kept_weights }
    }

    pub fn points(&self) -> &[SpherePoint] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }

    /// Mass of the closed geodesic ball `B(centre, radius)`.
    pub fn ball_mass(&self, centre: &SpherePoint, radius: f64) -> f64 {
        self.points.iter().zip(&self.weights).filter(|(p, _)| crate::sphere::distance(p, centre) <= radius).map(|(_, w)| w).sum()
    }
}
