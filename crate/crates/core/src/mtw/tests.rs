use super::*;
use crate::sampling::Rng64;
use crate::sphere::log_map;
use alloc::vec;
use approx::assert_relative_eq;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};

fn e1(n: usize) -> SpherePoint {
    SpherePoint::basis(n, 0).unwrap()
}

fn tangent(x: &SpherePoint, v: &[f64]) -> TangentVector {
    TangentVector::new(x, v.to_vec()).unwrap()
}

/// Query at `e₁` with prescribed `p₀`.
fn query(profile: &CostProfile, p0: &[f64], xi: &[f64], nu: &[f64]) -> CurvatureQuery {
    let x = e1(p0.len());
    let y = c_exp(profile, &tangent(&x, p0)).unwrap();
    CurvatureQuery::new(profile, &x, &y, tangent(&x, xi), tangent(&x, nu)).unwrap()
}

// Reference values of ∂²_s∂²_t F computed independently with 50-digit
// numerical differentiation of the definition.
const QUADRATIC_ORACLE: [(&[f64], &[f64], &[f64], f64); 4] = [
    (&[0.0, 0.7, 0.3], &[0.0, 0.6, 0.8], &[0.0, -0.8, 0.6], 0.7303468861293722),
    (&[0.0, 2.5, 0.4], &[0.0, 0.6, 0.8], &[0.0, -0.8, 0.6], 10.401853360374139),
    (&[0.0, 0.3, -1.1, 0.9], &[0.0, 1.0, 0.0, 0.0], &[0.0, 0.0, 0.6, 0.8], 0.92729213654406407),
    (&[0.0, 3.0, 0.0], &[0.0, 0.0, 1.0], &[0.0, 1.0, 0.0], 2214.0011363658175),
];

#[test]
fn closed_form_matches_high_precision_oracle() {
    for (p0, xi, nu, expected) in QUADRATIC_ORACLE {
        let q = query(&CostProfile::Quadratic, p0, xi, nu);
        assert_relative_eq!(mtw_closed_form(&CostProfile::Quadratic, &q).unwrap(), expected, max_relative = 1e-10);
    }
}

#[test]
fn finite_differences_match_high_precision_oracle() {
    for (p0, xi, nu, expected) in QUADRATIC_ORACLE.iter().take(3) {
        let q = query(&CostProfile::Quadratic, p0, xi, nu);
        let fd = mtw_fd_richardson(&CostProfile::Quadratic, &q, 1e-2).unwrap();
        assert_relative_eq!(fd, *expected, max_relative = 1e-5);
    }
}

#[test]
fn antenna_oracle() {
    // the same high-precision differentiation gives 2|ξ|²|ν|² − 4(ξ·ν)²
    let mut rng = Rng64::seed_from_u64(11);
    let a = CostProfile::AntennaLog;
    for _ in 0..40 {
        let n = 3 + rng.random_range(0..3);
        let x = random_point(&mut rng, n);
        let d = rng.random_range(0.05..2.9);
        let y = exp_map(&random_unit_tangent(&mut rng, &x).scale(d));
        let xi = crate::sampling::random_tangent(&mut rng, &x);
        let nu = crate::sampling::random_tangent(&mut rng, &x);
        let expected = 2.0 * xi.dot(&xi) * nu.dot(&nu) - 4.0 * xi.dot(&nu).powi(2);
        let q = CurvatureQuery::new(&a, &x, &y, xi, nu).unwrap();
        let h = scan_step(d, PI);
        let scale = q.xi.dot(&q.xi) * q.nu.dot(&q.nu);
        assert!((mtw_fd_richardson(&a, &q, h).unwrap() - expected).abs() <= 1e-4 * scale.max(1.0), "d={d}");
        assert!((mtw_hessian_fd(&a, &q, 1e-3).unwrap() - expected).abs() <= 1e-5 * scale.max(1.0));
    }
}

#[test]
fn near_diagonal_limit_is_two_thirds() {
    let q = query(&CostProfile::Quadratic, &[0.0, 1e-3, 0.0], &[0.0, 0.0, 1.0], &[0.0, 1.0, 0.0]);
    assert_relative_eq!(mtw_closed_form(&CostProfile::Quadratic, &q).unwrap(), 2.0 / 3.0, max_relative = 1e-6);
    let fd = mtw_fd_richardson(&CostProfile::Quadratic, &q, 1e-2).unwrap();
    assert_relative_eq!(fd, 2.0 / 3.0, max_relative = 1e-5);
    assert_eq!(closed_form_unit(0.0, 0.0, 0.0, 0.0, 1.0), 2.0 / 3.0);
}

#[test]
fn first_brace_with_vanishing_t_and_c() {
    // with t = 0 and c = 0 only (α²β²/r³)(r − sin r cos r)/sin² r survives
    let r: f64 = 1.0;
    let direct = r * r / r.powi(3) * (r - r.sin() * r.cos()) / r.sin().powi(2);
    assert_relative_eq!(closed_form_unit(r, 0.0, r * r, 0.0, 1.0), direct, max_relative = 1e-14);
    let q = query(&CostProfile::Quadratic, &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0], &[0.0, 0.0, 1.0]);
    assert!(!q.is_orthogonal());
    assert!(mtw_closed_form(&CostProfile::Quadratic, &q).is_err());
}

#[test]
fn small_radius_branch_is_continuous() {
    let eval = |r: f64, c: f64, frac: f64| {
        let alpha2 = r * r * (1.0 - frac * frac);
        closed_form_unit(r, c * alpha2.sqrt(), alpha2, frac * r, 1.0)
    };
    for &c in &[0.0, 0.5, 1.0] {
        for &frac in &[0.0, 0.3, 0.9] {
            let (lo, hi) = (eval(0.2 - 1e-9, c, frac), eval(0.2 + 1e-9, c, frac));
            assert!((lo - hi).abs() < 1e-9, "{lo} {hi}");
        }
    }
}

#[test]
fn closed_form_is_positive_on_a_grid() {
    let mut worst = f64::INFINITY;
    for i in 1..=60 {
        let r = (PI - 0.05) * i as f64 / 60.0;
        for j in 0..=20 {
            let t = r * j as f64 / 20.0;
            // α ⊥ β with |β| = 1 and r² = |α|² + t²
            let alpha = (r * r - t * t).max(0.0).sqrt();
            for k in 0..=10 {
                let c = alpha * (-1.0 + 0.2 * k as f64);
                worst = worst.min(closed_form_unit(r, c, alpha * alpha, t, 1.0));
            }
        }
    }
    assert!(worst > 0.0, "{worst}");
}

#[test]
fn bilinearity_in_squares() {
    for (p0, xi, nu, _) in QUADRATIC_ORACLE.iter().take(3) {
        let q = query(&CostProfile::Quadratic, p0, xi, nu);
        let base = mtw_closed_form(&CostProfile::Quadratic, &q).unwrap();
        let scaled = mtw_closed_form(&CostProfile::Quadratic, &q.scaled(2.0, 0.5)).unwrap();
        assert_relative_eq!(scaled, base, max_relative = 1e-12);
        let fd_base = mtw_fd_richardson(&CostProfile::Quadratic, &q, 1e-2).unwrap();
        let fd_scaled = mtw_fd_richardson(&CostProfile::Quadratic, &q.scaled(2.0, 1.0), 5e-3).unwrap();
        assert_relative_eq!(fd_scaled, 4.0 * fd_base, max_relative = 1e-4);
    }
}

#[test]
fn inequality_constants_on_a_coarse_grid() {
    let k = inequality_constants(10_001);
    assert_relative_eq!(k.c_util1, 1.0 / (PI * PI), max_relative = 1e-12);
    assert_relative_eq!(k.c_util2, 1.0 / (PI * PI), max_relative = 1e-12);
    assert_eq!(k.argmin_util1, PI);
    assert_eq!(k.min_trig, 0.0);
    assert_eq!(k.argmin_trig, 0.0);
    assert_relative_eq!(trig::sin_minus_r_cos(1e-3) / 1e-9, 1.0 / 3.0, max_relative = 1e-6);
    assert_relative_eq!(trig::r_minus_sin_cos(1e-3) / 1e-9, 2.0 / 3.0, max_relative = 1e-6);
}

#[test]
fn certify_is_deterministic_and_positive() {
    let a = certify_as(&CostProfile::Quadratic, 3, 0.1, 500, 7).unwrap();
    let b = certify_as(&CostProfile::Quadratic, 3, 0.1, 500, 7).unwrap();
    assert_eq!(a, b);
    assert!(a.certified());
    assert_eq!(a.rows.len(), 500);
    assert_eq!(a.rows[a.argmin_index].value, a.c0_estimate);
    assert!(distance(&a.argmin.x, &a.argmin.y) <= PI - 0.1 + 1e-12);
    let antenna = certify_as(&CostProfile::AntennaLog, 4, 0.1, 100, 7).unwrap();
    assert!(antenna.certified());
    assert!(certify_as(&CostProfile::Quadratic, 2, 0.1, 5, 0).is_err());
}

#[test]
fn scan_queries_are_admissible() {
    for i in 0..200 {
        let q = scan_query(&CostProfile::Quadratic, 5, 0.3, 1, i).unwrap();
        assert!(distance(&q.x, &q.y) <= PI - 0.3 + 1e-12);
        assert!(q.is_orthogonal());
        assert_relative_eq!(q.p0.norm(), log_map(&q.x, &q.y).unwrap().norm(), max_relative = 1e-12);
    }
}

#[test]
fn fd_reports_cut_contact() {
    let x = e1(3);
    let y = exp_map(&tangent(&x, &[0.0, PI - 1e-3, 0.0]));
    let q = CurvatureQuery::new(&CostProfile::Quadratic, &x, &y, tangent(&x, &[0.0, 1.0, 0.0]), tangent(&x, &[0.0, 0.0, 1.0])).unwrap();
    assert!(mtw_fd(&CostProfile::Quadratic, &q, 1e-2).is_err());
    let _ = vec![0u8];
}

proptest! {
    #[test]
    fn routes_agree_on_random_queries(seed in 0u64..5_000) {
        let q = scan_query(&CostProfile::Quadratic, 3 + (seed % 3) as usize, 0.3, seed, 0).unwrap();
        let exact = mtw_closed_form(&CostProfile::Quadratic, &q).unwrap();
        let fd = mtw_fd_richardson(&CostProfile::Quadratic, &q, 1e-2).unwrap();
        prop_assert!((fd - exact).abs() <= (1e-3 * exact.abs()).max(1e-4), "{} {}", fd, exact);
    }
}
