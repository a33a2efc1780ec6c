//! Seeded random sampling on the sphere.

use alloc::vec::Vec;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::sphere::{SpherePoint, TangentVector};

/// The generator used for every seeded scan.
pub type Rng64 = rand_chacha::ChaCha12Rng;

pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Uniformly distributed point on `S^{n-1}`.
pub fn random_point<R: Rng + ?Sized>(rng: &mut R, n: usize) -> SpherePoint {
    loop {
        let v = gaussian_vector(rng, n);
        if let Ok(p) = SpherePoint::new(v) {
            return p;
        }
    }
}

/// Isotropic Gaussian tangent vector at `x`.
pub fn random_tangent<R: Rng + ?Sized>(rng: &mut R, x: &SpherePoint) -> TangentVector {
    TangentVector::project(x, &gaussian_vector(rng, x.dim()))
}

/// Uniformly distributed unit tangent vector at `x`.
pub fn random_unit_tangent<R: Rng + ?Sized>(rng: &mut R, x: &SpherePoint) -> TangentVector {
    loop {
        if let Ok(u) = random_tangent(rng, x).unit() {
            return u;
        }
    }
}

/// A random orthonormal pair `(ξ, ν)` of tangent vectors at `x`.
pub fn random_orthonormal_pair<R: Rng + ?Sized>(rng: &mut R, x: &SpherePoint) -> (TangentVector, TangentVector) {
    let xi = random_unit_tangent(rng, x);
    loop {
        let v = random_tangent(rng, x);
        let w = v.add_scaled(-v.dot(&xi), &xi);
        if let Ok(nu) = w.unit() {
            let nu = nu.add_scaled(-nu.dot(&xi), &xi);
            if let Ok(nu) = nu.unit() {
                return (xi, nu);
            }
        }
    }
}

/// Independent generator for sample `stream` of a seeded scan, so scans
/// give the same result whatever the evaluation order.
pub fn stream_rng(seed: u64, stream: u64) -> Rng64 {
    use rand::SeedableRng;
    let mut rng = Rng64::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
