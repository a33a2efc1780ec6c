//! Transportation simplex (the network simplex on the complete bipartite
//! graph) with Bland's rule for both the entering and the leaving arc.

use alloc::collections::VecDeque;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Row-major cost matrix; `f64::INFINITY` marks forbidden pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<f64>,
}

impl CostMatrix {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols + j]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct SimplexSolution {
    /// Basic arcs `(i, j, flow)`; flows may be zero on degenerate arcs.
    pub basis: Vec<(usize, usize, f64)>,
    /// Row and column potentials with `u_i + v_j = c_ij` on the basis and
    /// `u_0 = 0`.
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub pivots: usize,
}

/// Minimises `Σ c_ij x_ij` subject to the marginals `a`, `b`. Both must be
/// nonnegative with equal totals.
pub(crate) fn solve(a: &[f64], b: &[f64], cost: &CostMatrix) -> Result<SimplexSolution> {
    let (m, n) = (a.len(), b.len());
    let finite_max = cost.values.iter().copied().filter(|c| c.is_finite()).fold(0.0, |acc: f64, c| acc.max(c.abs()));
    // forbidden arcs enter the basis only when the marginals force them
    let penalty = 1e6 * (1.0 + finite_max);
    let c = |i: usize, j: usize| {
        let v = cost.at(i, j);
        if v.is_finite() {
            v
        } else {
            penalty
        }
    };
    let mut basis = least_cost_start(a, b, &c, m, n);
    let tol = 1e-12 * (1.0 + finite_max);
    let limit = 50 * (m * n).max(100);
    let mut pivots = 0;
    loop {
        let tree = Tree::new(m, n, &basis);
        let (u, v) = tree.potentials(&basis, &c);
        let entering = (0..m).flat_map(|i| (0..n).map(move |j| (i, j))).find(|&(i, j)| c(i, j) - u[i] - v[j] < -tol);
        let Some((ei, ej)) = entering else {
            return Ok(SimplexSolution { basis, u, v, pivots });
        };
        if pivots >= limit {
            return Err(Error::NonConvergence { iterations: pivots, residual: c(ei, ej) - u[ei] - v[ej] });
        }
        pivots += 1;
        // cycle: entering arc (+), then the tree path from column ej back to
        // row ei with alternating signs starting with (−)
        let path = tree.path(ei, m + ej, &basis);
        let minus: Vec<usize> = path.iter().rev().step_by(2).copied().collect();
        let theta = minus.iter().map(|&k| basis[k].2).fold(f64::INFINITY, f64::min);
        let leaving = minus
            .iter()
            .copied()
            .filter(|&k| basis[k].2 <= theta)
            .min_by_key(|&k| (basis[k].0, basis[k].1))
            .expect("a cycle always has a backward arc");
        for (step, &k) in path.iter().rev().enumerate() {
            if step % 2 == 0 {
                basis[k].2 -= theta;
            } else {
                basis[k].2 += theta;
            }
        }
        basis[leaving] = (ei, ej, theta);
    }
}

/// Least-cost initial basis: allocate along arcs in increasing cost order,
/// crossing out one exhausted line per allocation, which yields exactly
/// `m + n − 1` basic arcs forming a spanning tree.
fn least_cost_start(a: &[f64], b: &[f64], c: &impl Fn(usize, usize) -> f64, m: usize, n: usize) -> Vec<(usize, usize, f64)> {
    let mut arcs: Vec<(usize, usize)> = (0..m).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    arcs.sort_by(|&(i, j), &(k, l)| c(i, j).total_cmp(&c(k, l)).then((i, j).cmp(&(k, l))));
    let (mut supply, mut demand) = (a.to_vec(), b.to_vec());
    let (mut row_open, mut col_open) = (alloc::vec![true; m], alloc::vec![true; n]);
    let (mut rows_left, mut cols_left) = (m, n);
    let mut basis = Vec::with_capacity(m + n - 1);
    for (i, j) in arcs {
        if basis.len() == m + n - 1 {
            break;
        }
        if !row_open[i] || !col_open[j] {
            continue;
        }
        let flow = supply[i].min(demand[j]);
        basis.push((i, j, flow));
        // close the line with the smaller remainder, never the last open one
        let close_row = if rows_left == 1 {
            false
        } else if cols_left == 1 {
            true
        } else {
            supply[i] <= demand[j]
        };
        if close_row {
            demand[j] -= flow;
            supply[i] = 0.0;
            row_open[i] = false;
            rows_left -= 1;
        } else {
            supply[i] -= flow;
            demand[j] = 0.0;
            col_open[j] = false;
            cols_left -= 1;
        }
    }
    basis
}

/// Spanning tree over rows `0..m` and columns `m..m+n`.
struct Tree {
    adjacency: Vec<Vec<usize>>,
    m: usize,
}

impl Tree {
    fn new(m: usize, n: usize, basis: &[(usize, usize, f64)]) -> Self {
        let mut adjacency = alloc::vec![Vec::new(); m + n];
        for (k, &(i, j, _)) in basis.iter().enumerate() {
            adjacency[i].push(k);
            adjacency[m + j].push(k);
        }
        Self { adjacency, m }
    }

    fn other(&self, arc: (usize, usize, f64), node: usize) -> usize {
        if node == arc.0 {
            self.m + arc.1
        } else {
            arc.0
        }
    }

    fn potentials(&self, basis: &[(usize, usize, f64)], c: &impl Fn(usize, usize) -> f64) -> (Vec<f64>, Vec<f64>) {
        let m = self.m;
        let mut pot = alloc::vec![f64::NAN; self.adjacency.len()];
        pot[0] = 0.0;
        let mut queue = VecDeque::from([0usize]);
        while let Some(node) = queue.pop_front() {
            for &k in &self.adjacency[node] {
                let next = self.other(basis[k], node);
                if pot[next].is_nan() {
                    let (i, j, _) = basis[k];
                    // u_i + v_j = c_ij
                    pot[next] = c(i, j) - pot[node];
                    queue.push_back(next);
                }
            }
        }
        let v = pot.split_off(m);
        (pot, v)
    }

    /// Basic arcs on the tree path from `from` to `to`, in order.
    fn path(&self, from: usize, to: usize, basis: &[(usize, usize, f64)]) -> Vec<usize> {
        let mut via = alloc::vec![usize::MAX; self.adjacency.len()];
        let mut seen = alloc::vec![false; self.adjacency.len()];
        seen[from] = true;
        let mut queue = VecDeque::from([from]);
        while let Some(node) = queue.pop_front() {
            if node == to {
                break;
            }
            for &k in &self.adjacency[node] {
                let next = self.other(basis[k], node);
                if !seen[next] {
                    seen[next] = true;
                    via[next] = k;
                    queue.push_back(next);
                }
            }
        }
        let mut arcs = Vec::new();
        let mut node = to;
        while node != from {
            let k = via[node];
            arcs.push(k);
            node = self.other(basis[k], node);
        }
        arcs.reverse();
        arcs
    }
}
