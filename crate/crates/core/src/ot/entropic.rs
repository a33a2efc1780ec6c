//! Log-domain Sinkhorn scaling with a Newton polish, followed by
//! marginal-restoring rounding.

use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use super::simplex::CostMatrix;
use crate::linalg::Matrix;
use crate::par;

/// Largest target size for which Newton steps on the dual are attempted.
const NEWTON_LIMIT: usize = 400;
/// Sinkhorn sweeps between Newton attempts.
const NEWTON_EVERY: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct ScalingOutcome {
    /// Dense plan after rounding, row-major.
    pub plan: Vec<f64>,
    /// Scaling potentials with `P_ij ≈ exp((f_i + g_j − c_ij)/ε)`.
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    pub iterations: usize,
    /// L1 row-marginal error of the last iterate before rounding.
    pub residual: f64,
    pub converged: bool,
}

fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let top = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return top;
    }
    top + values.map(|v| (v - top).exp()).sum::<f64>().ln()
}

pub(crate) fn scale(a: &[f64], b: &[f64], cost: &CostMatrix, eps: f64, rounds: usize, tol: f64) -> ScalingOutcome {
    let (m, n) = (a.len(), b.len());
    let log_a: Vec<f64> = a.iter().map(|w| w.ln()).collect();
    let log_b: Vec<f64> = b.iter().map(|w| w.ln()).collect();
    let mut f = alloc::vec![0.0; m];
    let mut g = alloc::vec![0.0; n];
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    let row_update = |g: &[f64], e: f64| par::map_indexed(m, |i| e * log_a[i] - e * log_sum_exp((0..n).map(|j| (g[j] - cost.at(i, j)) / e)));
    let col_update = |f: &[f64], e: f64| par::map_indexed(n, |j| e * log_b[j] - e * log_sum_exp((0..m).map(|i| (f[i] - cost.at(i, j)) / e)));
    let row_error = |f: &[f64], g: &[f64], e: f64| -> f64 {
        (0..m).map(|i| ((0..n).map(|j| ((f[i] + g[j] - cost.at(i, j)) / e).exp()).sum::<f64>() - a[i]).abs()).sum()
    };
    // anneal from the cost scale down to eps, warm-starting each stage
    let spread = cost.values.iter().copied().filter(|c| c.is_finite()).fold(0.0, |acc: f64, c| acc.max(c.abs()));
    let mut stage = spread.max(eps);
    while iterations < rounds {
        stage = (0.5 * stage).max(eps);
        let stage_tol = if stage > eps { tol.max(1e-6) } else { tol };
        let polish = n <= NEWTON_LIMIT && m * n * n <= 100_000_000;
        let mut sweeps = 0;
        while iterations < rounds {
            iterations += 1;
            sweeps += 1;
            if polish && sweeps % NEWTON_EVERY == 0 {
                // the row potentials are recomputed from g right below
                if let Some(ng) = newton_step(a, b, cost, &f, &g, stage) {
                    g = ng;
                }
            }
            f = row_update(&g, stage);
            g = col_update(&f, stage);
            residual = row_error(&f, &g, stage);
            if residual <= stage_tol {
                break;
            }
        }
        if stage <= eps && residual <= tol {
            break;
        }
    }
    let mut plan: Vec<f64> = (0..m).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| ((f[i] + g[j] - cost.at(i, j)) / eps).exp()).collect();
    round_to_marginals(&mut plan, a, b);
    ScalingOutcome { plan, f, g, iterations, residual, converged: residual <= tol }
}

fn marginal_error(a: &[f64], b: &[f64], cost: &CostMatrix, f: &[f64], g: &[f64], eps: f64) -> f64 {
    let (m, n) = (a.len(), b.len());
    let mut cols = alloc::vec![0.0; n];
    let mut err = 0.0;
    for i in 0..m {
        let mut row = 0.0;
        for (j, col) in cols.iter_mut().enumerate() {
            let p = ((f[i] + g[j] - cost.at(i, j)) / eps).exp();
            row += p;
            *col += p;
        }
        err += (row - a[i]).abs();
    }
    err + cols.iter().zip(b).map(|(c, w)| (c - w).abs()).sum::<f64>()
}

/// One damped Newton step on the dual of the regularised problem. The
/// row block is eliminated, leaving a reduced Laplacian system in `g` with
/// the last entry pinned to remove the constant null direction. Accepted
/// only if the combined marginal error decreases. Returns the new `g`.
fn newton_step(a: &[f64], b: &[f64], cost: &CostMatrix, f: &[f64], g: &[f64], eps: f64) -> Option<Vec<f64>> {
    let (m, n) = (a.len(), b.len());
    if n < 2 {
        return None;
    }
    let plan: Vec<f64> = (0..m * n).map(|k| ((f[k / n] + g[k % n] - cost.at(k / n, k % n)) / eps).exp()).collect();
    let rows: Vec<f64> = (0..m).map(|i| plan[i * n..(i + 1) * n].iter().sum()).collect();
    if rows.iter().any(|r| !(*r > 1e-300)) {
        return None;
    }
    let cols: Vec<f64> = (0..n).map(|j| (0..m).map(|i| plan[i * n + j]).sum()).collect();
    let row_rhs: Vec<f64> = (0..m).map(|i| eps * (a[i] - rows[i])).collect();
    let k = n - 1;
    let schur = Matrix::from_fn(k, k, |p, q| {
        let coupling: f64 = (0..m).map(|i| plan[i * n + p] * plan[i * n + q] / rows[i]).sum();
        if p == q { cols[p] - coupling } else { -coupling }
    });
    let rhs: Vec<f64> = (0..k).map(|j| eps * (b[j] - cols[j]) - (0..m).map(|i| plan[i * n + j] * row_rhs[i] / rows[i]).sum::<f64>()).collect();
    let mut dg = schur.solve(&rhs)?;
    dg.push(0.0);
    let df: Vec<f64> = (0..m).map(|i| (row_rhs[i] - (0..n).map(|j| plan[i * n + j] * dg[j]).sum::<f64>()) / rows[i]).collect();
    let before = marginal_error(a, b, cost, f, g, eps);
    let mut t = 1.0;
    for _ in 0..30 {
        let nf: Vec<f64> = f.iter().zip(&df).map(|(v, d)| v + t * d).collect();
        let ng: Vec<f64> = g.iter().zip(&dg).map(|(v, d)| v + t * d).collect();
        let after = marginal_error(a, b, cost, &nf, &ng, eps);
        if after < before {
            return Some(ng);
        }
        t *= 0.5;
    }
    None
}

/// Rounding onto the transport polytope: shrink rows and columns that
/// exceed their marginals, then spread the remaining deficit as a rank-one
/// correction.
fn round_to_marginals(plan: &mut [f64], a: &[f64], b: &[f64]) {
    let (m, n) = (a.len(), b.len());
    for i in 0..m {
        let row = &mut plan[i * n..(i + 1) * n];
        let sum: f64 = row.iter().sum();
        if sum > a[i] {
            let s = a[i] / sum;
            row.iter_mut().for_each(|p| *p *= s);
        }
    }
    for j in 0..n {
        let sum: f64 = (0..m).map(|i| plan[i * n + j]).sum();
        if sum > b[j] {
            let s = b[j] / sum;
            (0..m).for_each(|i| plan[i * n + j] *= s);
        }
    }
    let row_gap: Vec<f64> = (0..m).map(|i| (a[i] - plan[i * n..(i + 1) * n].iter().sum::<f64>()).max(0.0)).collect();
    let col_gap: Vec<f64> = (0..n).map(|j| (b[j] - (0..m).map(|i| plan[i * n + j]).sum::<f64>()).max(0.0)).collect();
    let total: f64 = row_gap.iter().sum();
    if total > 0.0 {
        for i in 0..m {
            for j in 0..n {
                plan[i * n + j] += row_gap[i] * col_gap[j] / total;
            }
        }
    }
}
