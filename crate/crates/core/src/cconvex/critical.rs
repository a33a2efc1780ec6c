use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use super::contact::ridge_samples_paired;
use super::{project_to_ridge, CConvexPotential};
use crate::grid::{flat_distance, SphereGrid};
use crate::par;
use crate::sphere::{distance, orthonormal_frame, SpherePoint};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CriticalPoint {
    pub grid_index: usize,
    pub grid_value: f64,
    pub point: SpherePoint,
    pub refined_value: f64,
}

/// Classification of the critical points of `h = φ + c(·, y)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CriticalReport {
    pub y: SpherePoint,
    pub global_min: f64,
    pub global_max: f64,
    pub argmax: usize,
    /// Distance from the refined maximiser to `−y`.
    pub max_to_antipode: f64,
    pub max_located: bool,
    pub minima: Vec<CriticalPoint>,
    /// Strict local maxima away from `−y`.
    pub spurious_maxima: Vec<CriticalPoint>,
    /// Largest gap between a local minimum value and the global minimum.
    pub minimum_gap: f64,
    pub tol: f64,
    pub passed: bool,
}

const SEARCH_MIN_STEP: f64 = 1e-9;
const SEARCH_MAX_POLLS: usize = 4000;

/// Derivative-free compass search on the sphere minimising `g`. The poll
/// set is `±e_k` and `±(e_k ± e_{k+1})/√2` in a tangent frame that rotates
/// each time the step is halved.
pub(crate) fn pattern_search(g: &dyn Fn(&SpherePoint) -> f64, start: &SpherePoint, step: f64) -> (SpherePoint, f64) {
    let mut x = start.clone();
    let mut gx = g(&x);
    let mut step = step;
    let mut turn = 0.0;
    for _ in 0..SEARCH_MAX_POLLS {
        if step < SEARCH_MIN_STEP || !gx.is_finite() {
            break;
        }
        let Ok(frame) = orthonormal_frame(&x, None) else { break };
        let m = frame.dim();
        let (c, s) = (turn.cos(), turn.sin());
        let mut dirs: Vec<Vec<f64>> = Vec::new();
        for k in 0..m {
            let l = (k + 1) % m;
            let mut e = alloc::vec![0.0; m];
            e[k] = c;
            e[l] += s;
            let mut f = alloc::vec![0.0; m];
            f[k] = -s;
            f[l] += c;
            for (a, b) in [(1.0, 0.0), (0.0, 1.0), (1.0, 1.0), (1.0, -1.0)] {
                let norm = if a * b == 0.0 { 1.0 } else { core::f64::consts::SQRT_2 };
                let v: Vec<f64> = e.iter().zip(&f).map(|(p, q)| (a * p + b * q) / norm).collect();
                dirs.push(v.iter().map(|t| -t).collect());
                dirs.push(v);
            }
        }
        let improved = dirs.iter().find_map(|d| {
            let cand = frame.point(&d.iter().map(|t| t * step).collect::<Vec<_>>());
            let gc = g(&cand);
            (gc < gx).then_some((cand, gc))
        });
        match improved {
            Some((cand, gc)) => {
                x = cand;
                gx = gc;
            }
            None => {
                step *= 0.5;
                turn += 2.399_963_229_728_653;
            }
        }
    }
    (x, gx)
}

/// Locates grid-local extrema of `h = φ + c(·, y)`, refines them by
/// pattern search, and checks that the only maximum sits at `−y` while
/// every local minimum attains the global minimum within `tol`.
pub fn critical_point_classifier(phi: &CConvexPotential, y: &SpherePoint, grid: &SphereGrid, tol: f64) -> CriticalReport {
    let profile = phi.profile();
    let h = |x: &SpherePoint| phi.value(x) + profile.eval(x, y);
    let values = par::map_indexed(grid.len(), |k| phi.value_flat(grid.coords(k)) + profile.f(flat_distance(grid.coords(k), y.coords())));
    let is_min = |k: usize| grid.neighbours(k).iter().all(|&j| values[k] <= values[j as usize]);
    let is_strict_max = |k: usize| grid.neighbours(k).iter().all(|&j| values[k] > values[j as usize]);
    let grid_min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let (global_max, argmax) = values.iter().copied().enumerate().fold((f64::NEG_INFINITY, 0), |a, (k, v)| if v > a.0 { (v, k) } else { a });

    let antipode = y.antipode();
    let neg = |x: &SpherePoint| -h(x);
    let (max_point, _) = pattern_search(&neg, grid.point(argmax), grid.spacing());
    let max_to_antipode = distance(&max_point, &antipode);
    let max_located = max_to_antipode <= grid.spacing();

    // minimisers of h sit on ridges, where h has a kink; a search confined
    // to the ridge avoids stalling there
    let ridge: Vec<(SpherePoint, usize, usize, f64)> =
        ridge_samples_paired(phi, grid).into_iter().map(|(p, i, j)| {
            let v = h(&p);
            (p, i, j, v)
        }).collect();
    let best_known = ridge.iter().map(|r| r.3).fold(grid_min, f64::min);
    let local_minima: Vec<usize> = (0..grid.len()).filter(|&k| is_min(k)).collect();
    let minima: Vec<CriticalPoint> = par::map_indexed(local_minima.len(), |n| {
        let k = local_minima[n];
        let start = grid.point(k);
        if values[k] <= best_known + tol {
            return CriticalPoint { grid_index: k, grid_value: values[k], point: start.clone(), refined_value: values[k] };
        }
        let mut best = pattern_search(&h, start, grid.spacing());
        let nearby = ridge
            .iter()
            .filter(|r| distance(&r.0, start) <= 2.0 * grid.spacing())
            .min_by(|a, b| a.3.total_cmp(&b.3));
        if let Some((p, i, j, _)) = nearby {
            let on_ridge = |q: &SpherePoint| project_to_ridge(phi, *i, *j, q).map_or(f64::INFINITY, |r| h(&r));
            let (q, v) = pattern_search(&on_ridge, p, grid.spacing());
            if v < best.1 {
                best = (project_to_ridge(phi, *i, *j, &q).unwrap_or(q), v);
            }
        }
        CriticalPoint { grid_index: k, grid_value: values[k], point: best.0, refined_value: best.1.min(values[k]) }
    });
    let global_min = minima.iter().map(|m| m.refined_value).fold(best_known, f64::min);
    let minimum_gap = minima.iter().map(|m| m.refined_value - global_min).fold(0.0, f64::max);

    let spurious_maxima: Vec<CriticalPoint> = (0..grid.len())
        .filter(|&k| k != argmax && is_strict_max(k))
        .filter_map(|k| {
            let (point, v) = pattern_search(&neg, grid.point(k), grid.spacing());
            (distance(&point, &antipode) > grid.spacing())
                .then(|| CriticalPoint { grid_index: k, grid_value: values[k], point, refined_value: -v })
        })
        .collect();

    let passed = max_located && spurious_maxima.is_empty() && minimum_gap <= tol;
    CriticalReport {
        y: y.clone(),
        global_min,
        global_max,
        argmax,
        max_to_antipode,
        max_located,
        minima,
        spurious_maxima,
        minimum_gap,
        tol,
        passed,
    }
}
