//! Exact geometry of the unit sphere `S^{n-1} ⊂ ℝⁿ`.
//!
//! Points are kept in ambient coordinates and renormalised on
//! construction. The ambient dimension is a runtime parameter (`n ≥ 3`).

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
// unused whenever std is linked elsewhere in the build
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, norm, scaled};
use crate::trig;

/// Minimum ambient dimension; `S²` is the first sphere with a pair of
/// orthogonal tangent directions.
pub const MIN_DIM: usize = 3;

/// Distance to the antipode below which `log_map` refuses to answer.
pub const ANTIPODAL_MARGIN: f64 = 1e-9;

/// A unit vector of `ℝⁿ`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpherePoint {
    coords: Vec<f64>,
}

impl SpherePoint {
    /// Normalises `coords` onto the sphere.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < MIN_DIM {
            return Err(Error::UnsupportedDimension(coords.len()));
        }
        let len = norm(&coords);
        if !(len.is_finite() && len > 0.0) {
            return Err(Error::domain("cannot normalise a zero or non-finite vector"));
        }
        Ok(Self { coords: scaled(&coords, 1.0 / len) })
    }

    /// The `k`-th standard basis vector of `ℝⁿ`.
    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if dim < MIN_DIM {
            return Err(Error::UnsupportedDimension(dim));
        }
        let mut coords = vec![0.0; dim];
        coords[k] = 1.0;
        Ok(Self { coords })
    }

    /// Renormalises without the dimension check; callers guarantee a
    /// finite nonzero vector of valid dimension.
    pub(crate) fn from_raw(coords: Vec<f64>) -> Self {
        let len = norm(&coords);
        Self { coords: scaled(&coords, 1.0 / len) }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn dot(&self, other: &SpherePoint) -> f64 {
        dot(&self.coords, &other.coords)
    }

    pub fn antipode(&self) -> SpherePoint {
        Self { coords: self.coords.iter().map(|c| -c).collect() }
    }

    /// Euclidean chord length `|x − y|`.
    pub fn chord(&self, other: &SpherePoint) -> f64 {
        self.coords.iter().zip(&other.coords).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    }

    /// The zero tangent vector at this point.
    pub fn zero_tangent(&self) -> TangentVector {
        TangentVector { base: self.clone(), vec: vec![0.0; self.dim()] }
    }
}

/// A tangent vector `v ⊥ x` attached to a base point. Its norm is a
/// geodesic length in radians.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TangentVector {
    base: SpherePoint,
    vec: Vec<f64>,
}

impl TangentVector {
    /// Projects `vec` onto the tangent space at `base`.
    pub fn new(base: &SpherePoint, vec: Vec<f64>) -> Result<Self> {
        if vec.len() != base.dim() {
            return Err(Error::DimensionMismatch { expected: base.dim(), found: vec.len() });
        }
        Ok(Self::project(base, &vec))
    }

    pub(crate) fn project(base: &SpherePoint, v: &[f64]) -> Self {
        let along = dot(v, base.coords());
        let mut vec = axpy(v, -along, base.coords());
        // second pass removes the residual normal component left by rounding
        let along = dot(&vec, base.coords());
        vec = axpy(&vec, -along, base.coords());
        Self { base: base.clone(), vec }
    }

    pub fn base(&self) -> &SpherePoint {
        &self.base
    }

    pub fn vec(&self) -> &[f64] {
        &self.vec
    }

    pub fn norm(&self) -> f64 {
        norm(&self.vec)
    }

    pub fn dot(&self, other: &TangentVector) -> f64 {
        dot(&self.vec, &other.vec)
    }

    pub fn scale(&self, s: f64) -> TangentVector {
        Self { base: self.base.clone(), vec: scaled(&self.vec, s) }
    }

    /// `self + s·other`; both must share the base point.
    pub fn add_scaled(&self, s: f64, other: &TangentVector) -> TangentVector {
        debug_assert_eq!(self.base.dim(), other.base.dim());
        Self { base: self.base.clone(), vec: axpy(&self.vec, s, &other.vec) }
    }

    /// `(1 − θ)·self + θ·other`
    pub fn lerp(&self, other: &TangentVector, theta: f64) -> TangentVector {
        let vec = self.vec.iter().zip(&other.vec).map(|(a, b)| (1.0 - theta) * a + theta * b).collect();
        Self { base: self.base.clone(), vec }
    }

    pub fn unit(&self) -> Result<TangentVector> {
        let n = self.norm();
        if n < 1e-300 {
            return Err(Error::DegenerateAxis { norm: n });
        }
        Ok(self.scale(1.0 / n))
    }
}

/// Orthonormal basis `e₁, …, e_{n−1}` of the tangent space at a point.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TangentFrame {
    base: SpherePoint,
    axes: Vec<Vec<f64>>,
}

impl TangentFrame {
    pub fn base(&self) -> &SpherePoint {
        &self.base
    }

    /// Intrinsic dimension `n − 1`.
    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axis(&self, k: usize) -> TangentVector {
        TangentVector { base: self.base.clone(), vec: self.axes[k].clone() }
    }

    pub fn axes(&self) -> &[Vec<f64>] {
        &self.axes
    }

    /// Components of a tangent vector in this frame.
    pub fn coordinates(&self, v: &TangentVector) -> Vec<f64> {
        self.axes.iter().map(|a| dot(a, v.vec())).collect()
    }

    /// Tangent vector with the given frame components.
    pub fn vector(&self, components: &[f64]) -> TangentVector {
        let mut vec = vec![0.0; self.base.dim()];
        for (axis, &c) in self.axes.iter().zip(components) {
            for (v, a) in vec.iter_mut().zip(axis) {
                *v += c * a;
            }
        }
        TangentVector { base: self.base.clone(), vec }
    }

    /// Normal (geodesic) coordinates of `y`, i.e. the frame components of
    /// `log_x(y)`.
    pub fn normal_coordinates(&self, y: &SpherePoint) -> Result<Vec<f64>> {
        Ok(self.coordinates(&log_map(&self.base, y)?))
    }

    /// Point with the given normal coordinates.
    pub fn point(&self, normal: &[f64]) -> SpherePoint {
        exp_map(&self.vector(normal))
    }

    /// Parallel transport of the frame along the geodesic to `y`.
    pub fn transported_to(&self, y: &SpherePoint) -> Result<TangentFrame> {
        let axes = self
            .axes
            .iter()
            .map(|a| parallel_transport(&TangentVector { base: self.base.clone(), vec: a.clone() }, y).map(|t| t.vec))
            .collect::<Result<Vec<_>>>()?;
        Ok(TangentFrame { base: y.clone(), axes })
    }

    /// Largest deviation of the Gram matrix from the identity, together
    /// with the largest normal component.
    pub fn orthonormality_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in self.axes.iter().enumerate() {
            worst = worst.max(dot(a, self.base.coords()).abs());
            for (j, b) in self.axes.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot(a, b) - target).abs());
            }
        }
        worst
    }
}

/// Geodesic distance `arccos(x·y) ∈ [0, π]`, evaluated as
/// `2·atan2(|x − y|, |x + y|)` which keeps full relative accuracy at both
/// ends of the range.
pub fn distance(x: &SpherePoint, y: &SpherePoint) -> f64 {
    let (mut minus, mut plus) = (0.0, 0.0);
    for (a, b) in x.coords.iter().zip(&y.coords) {
        minus += (a - b) * (a - b);
        plus += (a + b) * (a + b);
    }
    2.0 * minus.sqrt().atan2(plus.sqrt())
}

/// Riemannian exponential map `cos|p|·x + sin|p|·p/|p|`.
pub fn exp_map(p: &TangentVector) -> SpherePoint {
    let r = p.norm();
    if r == 0.0 {
        return p.base.clone();
    }
    let (c, s) = (r.cos(), trig::sinc(r));
    let coords = p.base.coords.iter().zip(&p.vec).map(|(x, v)| c * x + s * v).collect();
    SpherePoint::from_raw(coords)
}

/// Inverse of [`exp_map`]: the tangent vector at `x` of length `d(x, y)`
/// pointing at `y`.
pub fn log_map(x: &SpherePoint, y: &SpherePoint) -> Result<TangentVector> {
    let d = distance(x, y);
    if d >= PI - ANTIPODAL_MARGIN {
        return Err(Error::Antipodal { distance: d });
    }
    if d == 0.0 {
        return Ok(x.zero_tangent());
    }
    let w = TangentVector::project(x, y.coords());
    let wn = w.norm();
    if wn == 0.0 {
        return Ok(x.zero_tangent());
    }
    Ok(w.scale(d / wn))
}

/// Unit tangent at `x` pointing towards `y` (zero when `y = x`).
pub(crate) fn direction_to(x: &SpherePoint, y: &SpherePoint) -> TangentVector {
    let w = TangentVector::project(x, y.coords());
    let wn = w.norm();
    if wn < 1e-300 {
        x.zero_tangent()
    } else {
        w.scale(1.0 / wn)
    }
}

/// Parallel transport of `v` along the minimising geodesic from its base
/// point to `y`.
pub fn parallel_transport(v: &TangentVector, y: &SpherePoint) -> Result<TangentVector> {
    let x = v.base();
    let d = distance(x, y);
    if d >= PI - ANTIPODAL_MARGIN {
        return Err(Error::Antipodal { distance: d });
    }
    if d == 0.0 {
        return Ok(TangentVector { base: y.clone(), vec: v.vec.clone() });
    }
    let u = direction_to(x, y);
    // velocity of the geodesic at y
    let u_end: Vec<f64> =
        x.coords.iter().zip(&u.vec).map(|(xc, uc)| -d.sin() * xc + d.cos() * uc).collect();
    let along = dot(&v.vec, &u.vec);
    let vec: Vec<f64> = v.vec.iter().zip(&u.vec).zip(&u_end).map(|((vc, uc), ec)| vc + along * (ec - uc)).collect();
    Ok(TangentVector::project(y, &vec))
}

/// Orthonormal tangent frame at `x`. When `first_axis` is supplied it
/// becomes `e₁`; the remaining axes come from Gram–Schmidt over the
/// standard basis, taken in order of increasing `|x_k|`.
pub fn orthonormal_frame(x: &SpherePoint, first_axis: Option<&TangentVector>) -> Result<TangentFrame> {
    let n = x.dim();
    let mut axes: Vec<Vec<f64>> = Vec::with_capacity(n - 1);
    if let Some(axis) = first_axis {
        if axis.vec().len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: axis.vec().len() });
        }
        let t = TangentVector::project(x, axis.vec());
        let len = t.norm();
        if len < 1e-12 {
            return Err(Error::DegenerateAxis { norm: len });
        }
        axes.push(scaled(t.vec(), 1.0 / len));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| x.coords[a].abs().total_cmp(&x.coords[b].abs()).then(a.cmp(&b)));
    for k in order {
        if axes.len() == n - 1 {
            break;
        }
        let mut v = vec![0.0; n];
        v[k] = 1.0;
        for _ in 0..2 {
            let along = dot(&v, x.coords());
            v = axpy(&v, -along, x.coords());
            for a in &axes {
                let along = dot(&v, a);
                v = axpy(&v, -along, a);
            }
        }
        let len = norm(&v);
        if len > 1e-3 {
            axes.push(scaled(&v, 1.0 / len));
        }
    }
    debug_assert_eq!(axes.len(), n - 1);
    Ok(TangentFrame { base: x.clone(), axes })
}

/// Deterministic quasi-uniform point set. `n = 3` uses the Fibonacci
/// lattice; higher dimensions push a Kronecker (generalised golden ratio)
/// sequence through the inverse normal CDF and normalise.
pub fn fibonacci_grid(n: usize, count: usize) -> Result<Vec<SpherePoint>> {
    if n < MIN_DIM {
        return Err(Error::UnsupportedDimension(n));
    }
    if count == 0 {
        return Ok(Vec::new());
    }
    if n == 3 {
        let golden_angle = PI * (3.0 - 5.0.sqrt());
        return Ok((0..count)
            .map(|i| {
                let z = 1.0 - (2 * i + 1) as f64 / count as f64;
                let rho = (1.0 - z * z).max(0.0).sqrt();
                let theta = golden_angle * i as f64;
                SpherePoint::from_raw(vec![rho * theta.cos(), rho * theta.sin(), z])
            })
            .collect());
    }
    let alphas = kronecker_steps(n);
    Ok((0..count)
        .map(|i| {
            let coords: Vec<f64> = alphas
                .iter()
                .map(|a| {
                    let u = (0.5 + a * (i + 1) as f64).fract();
                    inverse_normal_cdf(u.clamp(1e-15, 1.0 - 1e-15))
                })
                .collect();
            if norm(&coords) == 0.0 {
                let mut e = vec![0.0; n];
                e[0] = 1.0;
                SpherePoint::from_raw(e)
            } else {
                SpherePoint::from_raw(coords)
            }
        })
        .collect())
}

/// Frequencies `φ_d^{-k}` of the R_d sequence, `φ_d` the positive root of
/// `x^{d+1} = x + 1`.
fn kronecker_steps(d: usize) -> Vec<f64> {
    let mut phi = 2.0f64;
    for _ in 0..64 {
        phi = (1.0 + phi).powf(1.0 / (d as f64 + 1.0));
    }
    (1..=d).map(|k| phi.powi(-(k as i32))).collect()
}

/// Acklam's rational approximation refined by one Halley step.
pub(crate) fn inverse_normal_cdf(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00, 3.754408661907416e+00];
    let low = 0.02425;
    let x = if p < low {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - low {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    let e = 0.5 * libm::erfc(-x / core::f64::consts::SQRT_2) - p;
    let u = e * (2.0 * PI).sqrt() * (x * x / 2.0).exp();
    x - u / (1.0 + x * u / 2.0)
}

/// Largest nearest-neighbour distance of a point set (brute force).
pub fn nearest_neighbour_spacing(points: &[SpherePoint]) -> f64 {
    crate::par::map_indexed(points.len(), |i| {
        points
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, q)| distance(&points[i], q))
            .fold(f64::INFINITY, f64::min)
    })
    .into_iter()
    .filter(|d| d.is_finite())
    .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{random_point, random_tangent, Rng64};
    use rand::SeedableRng;

    fn e(n: usize, k: usize) -> SpherePoint {
        SpherePoint::basis(n, k).unwrap()
    }

    #[test]
    fn distance_anchors() {
        assert_eq!(distance(&e(3, 0), &e(3, 0)), 0.0);
        assert!((distance(&e(3, 0), &e(3, 0).antipode()) - PI).abs() < 1e-15);
        assert!((distance(&e(3, 0), &e(3, 1)) - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn distance_agrees_with_arccos_away_from_the_ends() {
        let mut rng = Rng64::seed_from_u64(3);
        for _ in 0..200 {
            let (x, y) = (random_point(&mut rng, 4), random_point(&mut rng, 4));
            let acos = x.dot(&y).clamp(-1.0, 1.0).acos();
            assert!((distance(&x, &y) - acos).abs() < 1e-12);
        }
    }

    #[test]
    fn symmetric_and_triangle() {
        let mut rng = Rng64::seed_from_u64(5);
        for _ in 0..500 {
            let x = random_point(&mut rng, 3);
            let y = random_point(&mut rng, 3);
            let z = random_point(&mut rng, 3);
            assert_eq!(distance(&x, &y), distance(&y, &x));
            assert!(distance(&x, &z) <= distance(&x, &y) + distance(&y, &z) + 1e-10);
        }
    }

    #[test]
    fn exp_anchors() {
        let x = e(3, 0);
        assert_eq!(exp_map(&x.zero_tangent()), x);
        let p = TangentVector::new(&x, vec![0.0, PI / 2.0, 0.0]).unwrap();
        let y = exp_map(&p);
        assert!(distance(&y, &e(3, 1)) < 1e-15);
    }

    #[test]
    fn log_anchors() {
        let x = e(3, 0);
        assert_eq!(log_map(&x, &x).unwrap().norm(), 0.0);
        let p = log_map(&x, &e(3, 1)).unwrap();
        assert!((p.vec()[1] - PI / 2.0).abs() < 1e-15 && p.vec()[0].abs() < 1e-15);
        assert!(matches!(log_map(&x, &x.antipode()), Err(Error::Antipodal { .. })));
    }

    #[test]
    fn exp_log_round_trip_at_length_three() {
        let mut rng = Rng64::seed_from_u64(11);
        for n in 3..7 {
            let x = random_point(&mut rng, n);
            let p = random_tangent(&mut rng, &x).unit().unwrap().scale(3.0);
            let back = log_map(&x, &exp_map(&p)).unwrap();
            let err = back.vec().iter().zip(p.vec()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            assert!(err <= 1e-10, "n = {n}: {err}");
        }
    }

    #[test]
    fn log_exp_round_trip_at_distance_two_point_nine() {
        let mut rng = Rng64::seed_from_u64(12);
        for _ in 0..50 {
            let x = random_point(&mut rng, 3);
            let y = exp_map(&random_tangent(&mut rng, &x).unit().unwrap().scale(2.9));
            let p = log_map(&x, &y).unwrap();
            assert!((p.norm() - 2.9).abs() < 1e-10);
            assert!(distance(&exp_map(&p), &y) < 1e-10);
        }
    }

    #[test]
    fn frame_with_first_axis() {
        let x = e(3, 0);
        let f = orthonormal_frame(&x, Some(&TangentVector::new(&x, vec![0.0, 2.0, 0.0]).unwrap())).unwrap();
        assert_eq!(f.axes()[0], vec![0.0, 1.0, 0.0]);
        assert!(matches!(
            orthonormal_frame(&x, Some(&x.zero_tangent())),
            Err(Error::DegenerateAxis { .. })
        ));
    }

    #[test]
    fn frames_are_orthonormal_and_deterministic() {
        let mut rng = Rng64::seed_from_u64(13);
        for i in 0..1000 {
            let n = 3 + i % 4;
            let x = random_point(&mut rng, n);
            let f = orthonormal_frame(&x, None).unwrap();
            assert!(f.orthonormality_residual() <= 1e-12);
            assert_eq!(f, orthonormal_frame(&x, None).unwrap());
            let g = orthonormal_frame(&x, Some(&random_tangent(&mut rng, &x))).unwrap();
            assert!(g.orthonormality_residual() <= 1e-12);
        }
    }

    #[test]
    fn normal_coordinates_preserve_distance_from_the_base() {
        let mut rng = Rng64::seed_from_u64(17);
        for _ in 0..200 {
            let x = random_point(&mut rng, 5);
            let y = random_point(&mut rng, 5);
            let f = orthonormal_frame(&x, Some(&random_tangent(&mut rng, &x))).unwrap();
            let z = f.normal_coordinates(&y).unwrap();
            assert!((norm(&z) - x.dot(&y).clamp(-1.0, 1.0).acos()).abs() < 1e-10);
            assert!(distance(&f.point(&z), &y) < 1e-10);
        }
    }

    #[test]
    fn grid_single_point_and_determinism() {
        for n in 3..6 {
            let g = fibonacci_grid(n, 1).unwrap();
            assert_eq!(g.len(), 1);
            assert!((norm(g[0].coords()) - 1.0).abs() < 1e-15);
            assert_eq!(fibonacci_grid(n, 257).unwrap(), fibonacci_grid(n, 257).unwrap());
        }
        assert!(matches!(fibonacci_grid(2, 10), Err(Error::UnsupportedDimension(2))));
    }

    #[test]
    fn grid_cap_mass_matches_cap_area() {
        let grid = fibonacci_grid(3, 10_000).unwrap();
        let r: f64 = 0.3;
        let exact = (1.0 - r.cos()) / 2.0;
        let mut rng = Rng64::seed_from_u64(19);
        let mut worst: f64 = 0.0;
        for _ in 0..300 {
            let c = random_point(&mut rng, 3);
            let inside = grid.iter().filter(|p| distance(p, &c) <= r).count() as f64 / grid.len() as f64;
            worst = worst.max((inside - exact).abs() / exact);
        }
        assert!(worst <= 0.05, "worst relative deviation {worst}");
    }

    #[test]
    fn high_dimensional_grid_is_roughly_balanced() {
        let grid = fibonacci_grid(5, 4000).unwrap();
        for k in 0..5 {
            let mean: f64 = grid.iter().map(|p| p.coords()[k]).sum::<f64>() / grid.len() as f64;
            assert!(mean.abs() < 0.02, "axis {k} mean {mean}");
        }
    }

    #[test]
    fn inverse_normal_cdf_is_accurate() {
        for &(p, z) in &[(0.5, 0.0), (0.975, 1.959963984540054), (0.001, -3.090232306167813)] {
            assert!((inverse_normal_cdf(p) - z).abs() < 1e-12);
        }
    }

    #[test]
    fn parallel_transport_is_an_isometry_along_the_geodesic() {
        let mut rng = Rng64::seed_from_u64(23);
        for _ in 0..100 {
            let x = random_point(&mut rng, 4);
            let y = random_point(&mut rng, 4);
            let f = orthonormal_frame(&x, None).unwrap();
            let g = f.transported_to(&y).unwrap();
            assert!(g.orthonormality_residual() < 1e-12);
            let u = direction_to(&x, &y);
            let moved = parallel_transport(&u, &y).unwrap();
            // the geodesic's own velocity at y points away from x
            let away = direction_to(&y, &x).scale(-1.0);
            assert!(moved.vec().iter().zip(away.vec()).all(|(a, b)| (a - b).abs() < 1e-10));
        }
    }
}
