//! Point grids on the sphere with a bucket index for radius queries.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::sphere::{distance, fibonacci_grid, SpherePoint, MIN_DIM};

/// A point set with cached flat coordinates, nearest-neighbour spacing
/// and neighbour lists.
#[derive(Debug, Clone)]
pub struct SphereGrid {
    dim: usize,
    points: Vec<SpherePoint>,
    flat: Vec<f64>,
    cell: f64,
    buckets: BTreeMap<Vec<i32>, Vec<u32>>,
    spacing: f64,
    neighbours: Vec<Vec<u32>>,
}

/// Neighbour radius in units of the spacing.
const NEIGHBOUR_FACTOR: f64 = 1.5;

impl SphereGrid {
    pub fn fibonacci(dim: usize, count: usize) -> Result<Self> {
        Self::from_points(fibonacci_grid(dim, count)?)
    }

    pub fn from_points(points: Vec<SpherePoint>) -> Result<Self> {
        let Some(first) = points.first() else {
            return Err(Error::domain("grid needs at least one point"));
        };
        let dim = first.dim();
        if dim < MIN_DIM {
            return Err(Error::UnsupportedDimension(dim));
        }
        if let Some(p) = points.iter().find(|p| p.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: p.dim() });
        }
        let flat: Vec<f64> = points.iter().flat_map(|p| p.coords().iter().copied()).collect();
        // typical spacing of a uniform set: (area / count)^(1/(n−1))
        let area = sphere_area(dim);
        let typical = (area / points.len() as f64).powf(1.0 / (dim - 1) as f64);
        let cell = (2.0 * typical).min(2.0);
        let mut grid = Self { dim, points, flat, cell, buckets: BTreeMap::new(), spacing: 0.0, neighbours: Vec::new() };
        for i in 0..grid.points.len() {
            grid.buckets.entry(grid.key(grid.coords(i))).or_default().push(i as u32);
        }
        let nn = crate::par::map_indexed(grid.len(), |i| grid.nearest_other(i));
        grid.spacing = nn.iter().copied().filter(|d| d.is_finite()).fold(0.0, f64::max);
        let radius = NEIGHBOUR_FACTOR * grid.spacing;
        grid.neighbours = crate::par::map_indexed(grid.len(), |i| {
            grid.within(grid.coords(i), radius).into_iter().filter(|&j| j as usize != i).collect()
        });
        Ok(grid)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[SpherePoint] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &SpherePoint {
        &self.points[i]
    }

    pub fn coords(&self, i: usize) -> &[f64] {
        &self.flat[i * self.dim..(i + 1) * self.dim]
    }

    /// Largest nearest-neighbour distance.
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Grid points within `1.5 × spacing` of point `i`.
    pub fn neighbours(&self, i: usize) -> &[u32] {
        &self.neighbours[i]
    }

    fn key(&self, c: &[f64]) -> Vec<i32> {
        c.iter().map(|v| (v / self.cell).floor() as i32).collect()
    }

    /// Indices of grid points with geodesic distance at most `radius`.
    pub fn within(&self, c: &[f64], radius: f64) -> Vec<u32> {
        let chord = 2.0 * (0.5 * radius.min(core::f64::consts::PI)).sin();
        let reach = (chord / self.cell).ceil() as i32;
        let centre = self.key(c);
        let mut out = Vec::new();
        let span = (2 * reach + 1) as usize;
        let cells = span.pow(self.dim as u32);
        // past this many cells a linear scan is cheaper
        if cells > self.buckets.len() {
            for (_, bucket) in self.buckets.iter() {
                self.collect(bucket, c, radius, &mut out);
            }
        } else {
            let mut offset = alloc::vec![-reach; self.dim];
            loop {
                let k: Vec<i32> = centre.iter().zip(&offset).map(|(a, b)| a + b).collect();
                if let Some(bucket) = self.buckets.get(&k) {
                    self.collect(bucket, c, radius, &mut out);
                }
                let mut axis = 0;
                loop {
                    if axis == self.dim {
                        out.sort_unstable();
                        return out;
                    }
                    offset[axis] += 1;
                    if offset[axis] <= reach {
                        break;
                    }
                    offset[axis] = -reach;
                    axis += 1;
                }
            }
        }
        out.sort_unstable();
        out
    }

    fn collect(&self, bucket: &[u32], c: &[f64], radius: f64, out: &mut Vec<u32>) {
        for &j in bucket {
            if flat_distance(self.coords(j as usize), c) <= radius {
                out.push(j);
            }
        }
    }

    fn nearest_other(&self, i: usize) -> f64 {
        let c = self.coords(i);
        let mut radius = self.cell;
        loop {
            let best = self
                .within(c, radius)
                .into_iter()
                .filter(|&j| j as usize != i)
                .map(|j| flat_distance(self.coords(j as usize), c))
                .fold(f64::INFINITY, f64::min);
            if best.is_finite() || radius >= core::f64::consts::PI {
                return best;
            }
            radius = (2.0 * radius).min(core::f64::consts::PI);
        }
    }

    /// Closest grid point to `y` and its distance.
    pub fn nearest(&self, y: &SpherePoint) -> (usize, f64) {
        let mut radius = self.cell;
        loop {
            let best = self
                .within(y.coords(), radius)
                .into_iter()
                .map(|j| (j as usize, distance(&self.points[j as usize], y)))
                .fold((usize::MAX, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
            if best.0 != usize::MAX || radius >= core::f64::consts::PI {
                return best;
            }
            radius = (2.0 * radius).min(core::f64::consts::PI);
        }
    }
}

/// Ball tree over raw unit vectors, used for branch-and-bound searches.
#[derive(Debug, Clone)]
pub(crate) struct BallTree {
    dim: usize,
    /// Point indices in tree order.
    order: Vec<u32>,
    nodes: Vec<TreeNode>,
}

#[derive(Debug, Clone)]
pub(crate) struct TreeNode {
    pub centre: Vec<f64>,
    pub radius: f64,
    pub start: usize,
    pub end: usize,
    pub children: Option<(usize, usize)>,
}

const LEAF_SIZE: usize = 16;

impl BallTree {
    pub fn build(dim: usize, flat: &[f64]) -> Self {
        let count = flat.len() / dim;
        let mut tree = Self { dim, order: (0..count as u32).collect(), nodes: Vec::new() };
        if count > 0 {
            tree.split(flat, 0, count);
        }
        tree
    }

    fn split(&mut self, flat: &[f64], start: usize, end: usize) -> usize {
        let dim = self.dim;
        let at = |i: u32| &flat[i as usize * dim..(i as usize + 1) * dim];
        let mut centre = alloc::vec![0.0; dim];
        for &i in &self.order[start..end] {
            for (c, v) in centre.iter_mut().zip(at(i)) {
                *c += v;
            }
        }
        let norm = centre.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm > 1e-12 {
            centre.iter_mut().for_each(|c| *c /= norm);
        } else {
            centre = at(self.order[start]).to_vec();
        }
        let radius = self.order[start..end].iter().map(|&i| flat_distance(at(i), &centre)).fold(0.0, f64::max);
        let id = self.nodes.len();
        self.nodes.push(TreeNode { centre, radius, start, end, children: None });
        if end - start > LEAF_SIZE {
            let axis = (0..dim)
                .map(|k| {
                    let (lo, hi) = self.order[start..end]
                        .iter()
                        .map(|&i| at(i)[k])
                        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
                    (hi - lo, k)
                })
                .fold((f64::NEG_INFINITY, 0), |a, b| if b.0 > a.0 { b } else { a })
                .1;
            let mid = (start + end) / 2;
            self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| at(a)[axis].total_cmp(&at(b)[axis]).then(a.cmp(&b)));
            let left = self.split(flat, start, mid);
            let right = self.split(flat, mid, end);
            self.nodes[id].children = Some((left, right));
        }
        id
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn points_of(&self, node: &TreeNode) -> &[u32] {
        &self.order[node.start..node.end]
    }

    /// Whether some point has `value < threshold`, pruning nodes whose
    /// lower bound is already at or above the threshold.
    pub fn any_below(&self, threshold: f64, lower: impl Fn(usize) -> f64, value: impl Fn(u32) -> f64) -> bool {
        if self.nodes.is_empty() {
            return false;
        }
        let mut stack = alloc::vec![0usize];
        while let Some(id) = stack.pop() {
            if lower(id) >= threshold {
                continue;
            }
            let node = &self.nodes[id];
            match node.children {
                Some((l, r)) => {
                    let (bl, br) = (lower(l), lower(r));
                    // visit the more promising child first
                    if bl <= br {
                        stack.push(r);
                        stack.push(l);
                    } else {
                        stack.push(l);
                        stack.push(r);
                    }
                }
                None => {
                    if self.points_of(node).iter().any(|&i| value(i) < threshold) {
                        return true;
                    }
                }
            }
        }
        false
    }

    /// Smallest `value` over all points, with its index.
    pub fn minimum(&self, lower: impl Fn(usize) -> f64, value: impl Fn(u32) -> f64) -> (f64, u32) {
        let mut best = (f64::INFINITY, u32::MAX);
        if self.nodes.is_empty() {
            return best;
        }
        let mut stack = alloc::vec![0usize];
        while let Some(id) = stack.pop() {
            if lower(id) >= best.0 {
                continue;
            }
            let node = &self.nodes[id];
            match node.children {
                Some((l, r)) => {
                    let (bl, br) = (lower(l), lower(r));
                    if bl <= br {
                        stack.push(r);
                        stack.push(l);
                    } else {
                        stack.push(l);
                        stack.push(r);
                    }
                }
                None => {
                    for &i in self.points_of(node) {
                        let v = value(i);
                        if v < best.0 || (v == best.0 && i < best.1) {
                            best = (v, i);
                        }
                    }
                }
            }
        }
        best
    }
}

/// Geodesic distance between raw unit vectors.
pub(crate) fn flat_distance(a: &[f64], b: &[f64]) -> f64 {
    let (mut minus, mut plus) = (0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        minus += (x - y) * (x - y);
        plus += (x + y) * (x + y);
    }
    2.0 * minus.sqrt().atan2(plus.sqrt())
}

/// Surface area of `S^{n−1}`: `2π^{n/2}/Γ(n/2)`.
pub fn sphere_area(n: usize) -> f64 {
    let pi = core::f64::consts::PI;
    // Γ(n/2) by the half-integer recursion
    let mut gamma = if n % 2 == 0 { 1.0 } else { pi.sqrt() };
    let mut k = if n % 2 == 0 { 1.0 } else { 0.5 };
    while k < n as f64 / 2.0 {
        gamma *= k;
        k += 1.0;
    }
    2.0 * pi.powf(n as f64 / 2.0) / gamma
}
