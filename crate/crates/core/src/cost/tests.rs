use super::*;
use crate::sampling::{random_point, random_tangent, random_unit_tangent, Rng64};
use crate::sphere::{exp_map, log_map};
use alloc::vec::Vec;
use approx::assert_relative_eq;
use proptest::prelude::*;
use rand::SeedableRng;

fn profiles() -> [CostProfile; 2] {
    [CostProfile::Quadratic, CostProfile::AntennaLog]
}

fn point(c: &[f64]) -> SpherePoint {
    SpherePoint::new(c.to_vec()).unwrap()
}

/// Point at distance `d` from `x` along a random direction.
fn at_distance(rng: &mut Rng64, x: &SpherePoint, d: f64) -> SpherePoint {
    exp_map(&random_unit_tangent(rng, x).scale(d))
}

fn fd1(f: impl Fn(f64) -> f64, d: f64, h: f64) -> f64 {
    (-f(d + 2.0 * h) + 8.0 * f(d + h) - 8.0 * f(d - h) + f(d - 2.0 * h)) / (12.0 * h)
}

#[test]
fn profile_derivatives_match_finite_differences() {
    for p in profiles() {
        for &d in &[0.1, 0.7, 1.5, 2.4, 2.9] {
            let h = 1e-4;
            assert_relative_eq!(p.df(d), fd1(|t| p.f(t), d, h), max_relative = 1e-8);
            assert_relative_eq!(p.d2f(d), fd1(|t| p.df(t), d, h), max_relative = 1e-8);
            assert_relative_eq!(p.d3f(d), fd1(|t| p.d2f(t), d, h), max_relative = 1e-7, epsilon = 1e-12);
            assert_relative_eq!(p.d4f(d), fd1(|t| p.d3f(t), d, h), max_relative = 1e-7, epsilon = 1e-12);
        }
    }
}

#[test]
fn antenna_anchor_values() {
    let a = CostProfile::AntennaLog;
    assert_eq!(a.f(0.0), -0.5 * LN_2);
    assert_eq!(a.df(0.0), 0.0);
    assert_relative_eq!(a.d2f(0.0), 0.25);
    assert_relative_eq!(a.df(PI / 2.0), 0.5, max_relative = 1e-15);
    assert!(a.f(PI).is_infinite() || a.f(PI) > 30.0);
    assert_eq!(a.max_gradient(), f64::INFINITY);
    assert_eq!(CostProfile::Quadratic.max_gradient(), PI);
}

#[test]
fn antenna_costs_agree_with_chord_formulas() {
    let mut rng = Rng64::seed_from_u64(1);
    for n in 3..6 {
        for _ in 0..200 {
            let x = random_point(&mut rng, n);
            let y = random_point(&mut rng, n);
            let plus: f64 = x.coords().iter().zip(y.coords()).map(|(a, b)| (a + b) * (a + b)).sum();
            let reduced = -plus.sqrt().ln() + 0.5 * LN_2;
            assert_relative_eq!(CostProfile::AntennaLog.eval(&x, &y), reduced, epsilon = 1e-12, max_relative = 1e-12);
            assert_relative_eq!(OriginalAntenna.pair_cost(&x, &y), OriginalAntenna::via_reduced(&x, &y), epsilon = 1e-12, max_relative = 1e-12);
        }
    }
}

#[test]
fn cost_rejects_the_cut() {
    let x = point(&[1.0, 0.0, 0.0]);
    for p in profiles() {
        assert!(matches!(cost(&p, &x, &x.antipode()), Err(Error::CutLocus { .. })));
        assert!(matches!(grad_x(&p, &x, &x.antipode()), Err(Error::CutLocus { .. })));
        assert!(cost(&p, &x, &point(&[0.0, 1.0, 0.0])).is_ok());
    }
}

#[test]
fn gradient_matches_directional_derivatives() {
    let mut rng = Rng64::seed_from_u64(2);
    for p in profiles() {
        for n in 3..6 {
            for _ in 0..50 {
                let x = random_point(&mut rng, n);
                let d = 0.05 + 2.9 * rand::Rng::random::<f64>(&mut rng);
                let y = at_distance(&mut rng, &x, d);
                let g = grad_x(&p, &x, &y).unwrap();
                let v = random_tangent(&mut rng, &x);
                let fd = fd1(|s| p.eval(&exp_map(&v.scale(s)), &y), 0.0, 1e-4);
                assert_relative_eq!(g.dot(&v), fd, epsilon = 1e-8, max_relative = 1e-7);
            }
        }
    }
}

/// Mixed second difference of `g(s, t)` at the origin.
fn fd_mixed(g: impl Fn(f64, f64) -> f64, h: f64) -> f64 {
    (g(h, h) - g(h, -h) - g(-h, h) + g(-h, -h)) / (4.0 * h * h)
}

#[test]
fn hessian_xx_matches_normal_coordinate_differences() {
    let mut rng = Rng64::seed_from_u64(3);
    for p in profiles() {
        for n in 3..6 {
            for _ in 0..30 {
                let x = random_point(&mut rng, n);
                let d = 0.1 + 2.7 * rand::Rng::random::<f64>(&mut rng);
                let y = at_distance(&mut rng, &x, d);
                let a = random_tangent(&mut rng, &x);
                let b = random_tangent(&mut rng, &x);
                let exact = hessian_xx_form(&p, &x, &y, &a, &b).unwrap();
                let fd = fd_mixed(|s, t| p.eval(&exp_map(&a.scale(s).add_scaled(t, &b)), &y), 1e-4);
                assert_relative_eq!(exact, fd, epsilon = 1e-5, max_relative = 1e-5);

                let block = hessian_xx(&p, &x, &y).unwrap();
                let framed = hessian_xx_in_frame(&p, &y, &block.frame_x).unwrap();
                assert!(block.matrix.max_abs_diff(&framed) < 1e-10 * (1.0 + framed.max_abs()));
            }
        }
    }
}

#[test]
fn hessian_xy_matches_mixed_differences() {
    let mut rng = Rng64::seed_from_u64(4);
    for p in profiles() {
        for n in 3..6 {
            for _ in 0..30 {
                let x = random_point(&mut rng, n);
                let d = 0.1 + 2.7 * rand::Rng::random::<f64>(&mut rng);
                let y = at_distance(&mut rng, &x, d);
                let a = random_tangent(&mut rng, &x);
                let b = random_tangent(&mut rng, &y);
                let exact = hessian_xy_form(&p, &x, &y, &a, &b).unwrap();
                let fd = fd_mixed(|s, t| p.eval(&exp_map(&a.scale(s)), &exp_map(&b.scale(t))), 1e-4);
                assert_relative_eq!(exact, fd, epsilon = 1e-5, max_relative = 1e-5);

                let block = hessian_xy(&p, &x, &y).unwrap();
                let framed = hessian_xy_in_frames(&p, &block.frame_x, &block.frame_y).unwrap();
                assert!(block.matrix.max_abs_diff(&framed) < 1e-9 * (1.0 + framed.max_abs()));
            }
        }
    }
}

#[test]
fn hessians_on_the_diagonal() {
    let x = point(&[0.0, 0.0, 1.0, 0.0]);
    for p in profiles() {
        let f2 = p.d2f(0.0);
        let xx = hessian_xx(&p, &x, &x).unwrap().matrix;
        let xy = hessian_xy(&p, &x, &x).unwrap().matrix;
        assert!(xx.max_abs_diff(&Matrix::identity(3).scale(f2)) < 1e-15);
        assert!(xy.max_abs_diff(&Matrix::identity(3).scale(-f2)) < 1e-15);
    }
}

#[test]
fn mixed_hessian_determinant_against_nalgebra() {
    let mut rng = Rng64::seed_from_u64(5);
    for p in profiles() {
        let x = random_point(&mut rng, 5);
        let y = at_distance(&mut rng, &x, 1.3);
        let fx = orthonormal_frame(&x, Some(&random_unit_tangent(&mut rng, &x))).unwrap();
        let fy = orthonormal_frame(&y, Some(&random_unit_tangent(&mut rng, &y))).unwrap();
        let m = hessian_xy_in_frames(&p, &fx, &fy).unwrap();
        let na = nalgebra::DMatrix::from_fn(4, 4, |i, j| m[(i, j)]);
        let expected = p.d2f(1.3) * (p.df(1.3) / 1.3f64.sin()).powi(3);
        assert_relative_eq!(na.determinant().abs(), expected, max_relative = 1e-10);
        assert_relative_eq!(m.determinant().abs(), expected, max_relative = 1e-10);
    }
}

#[test]
fn c_exp_inverts_the_gradient() {
    let mut rng = Rng64::seed_from_u64(6);
    for p in profiles() {
        for n in 3..7 {
            for _ in 0..100 {
                let x = random_point(&mut rng, n);
                let d = 3.0 * rand::Rng::random::<f64>(&mut rng);
                let y = at_distance(&mut rng, &x, d);
                let q = minus_grad_x(&p, &x, &y).unwrap();
                let back = c_exp(&p, &q).unwrap();
                assert!(distance(&back, &y) < 1e-10, "{p:?} d={d}");
            }
        }
    }
}

#[test]
fn antenna_c_exp_closed_form() {
    for &s in &[1e-6, 0.3, 1.0, 10.0, 1e4] {
        let d = inverse_gradient_norm(&CostProfile::AntennaLog, s).unwrap();
        assert_relative_eq!(d, 2.0 * (2.0 * s).atan(), max_relative = 1e-12);
    }
}

#[test]
fn c_exp_rejects_out_of_range_gradients() {
    let x = point(&[1.0, 0.0, 0.0]);
    let p = TangentVector::new(&x, alloc::vec![0.0, PI, 0.0]).unwrap();
    assert!(matches!(c_exp(&CostProfile::Quadratic, &p), Err(Error::GradientOutOfRange { .. })));
    assert!(c_exp(&CostProfile::AntennaLog, &p).is_ok());
    assert_eq!(c_exp(&CostProfile::Quadratic, &x.zero_tangent()).unwrap(), x);
}

#[test]
fn quadratic_c_segment_is_the_geodesic_in_log_coordinates() {
    let mut rng = Rng64::seed_from_u64(7);
    let x = random_point(&mut rng, 4);
    let y0 = at_distance(&mut rng, &x, 1.0);
    let y1 = at_distance(&mut rng, &x, 2.0);
    let (l0, l1) = (log_map(&x, &y0).unwrap(), log_map(&x, &y1).unwrap());
    for k in 0..=10 {
        let theta = k as f64 / 10.0;
        let y = c_segment(&CostProfile::Quadratic, &x, &y0, &y1, theta).unwrap();
        assert!(distance(&y, &exp_map(&l0.lerp(&l1, theta))) < 1e-12);
    }
    assert_eq!(c_segment(&CostProfile::Quadratic, &x, &y0, &x.antipode(), 0.5), Err(Error::AntipodalEndpoint));
}

#[test]
fn c_segment_endpoints_are_reproduced() {
    let mut rng = Rng64::seed_from_u64(8);
    let x = random_point(&mut rng, 3);
    let y0 = at_distance(&mut rng, &x, 2.5);
    let y1 = at_distance(&mut rng, &x, 3.1);
    let p = CostProfile::AntennaLog;
    assert!(distance(&c_segment(&p, &x, &y0, &y1, 0.0).unwrap(), &y0) < 1e-10);
    assert!(distance(&c_segment(&p, &x, &y0, &y1, 1.0).unwrap(), &y1) < 1e-10);
}

fn tabulate(p: &CostProfile, m: usize, cut: f64) -> TabulatedProfile {
    let knots: Vec<f64> = (0..m).map(|i| cut * i as f64 / (m - 1) as f64).collect();
    let col = |g: &dyn Fn(f64) -> f64| knots.iter().map(|&d| g(d)).collect::<Vec<_>>();
    let columns = [col(&|d| p.f(d)), col(&|d| p.df(d)), col(&|d| p.d2f(d)), col(&|d| p.d3f(d)), col(&|d| p.d4f(d))];
    TabulatedProfile::new("tab", knots, columns).unwrap()
}

#[test]
fn tabulated_profile_reproduces_the_antenna() {
    let tab = tabulate(&CostProfile::AntennaLog, 400, 2.8);
    let a = CostProfile::AntennaLog;
    for k in 0..97 {
        let d = 0.0281 * k as f64 + 0.003;
        assert_relative_eq!(tab.value(d), a.f(d), epsilon = 1e-9);
        assert_relative_eq!(tab.d1(d), a.df(d), epsilon = 1e-8);
        assert_relative_eq!(tab.d2(d), a.d2f(d), epsilon = 1e-7, max_relative = 1e-7);
        assert_relative_eq!(tab.d4(d), a.d4f(d), max_relative = 1e-3);
    }
    let custom = CostProfile::custom(tab);
    assert_eq!(custom.kind(), ProfileKind::Custom);
    assert_relative_eq!(custom.max_gradient(), a.df(2.8), max_relative = 1e-12);
    let s = 0.9;
    assert_relative_eq!(inverse_gradient_norm(&custom, s).unwrap(), 2.0 * (2.0 * s).atan(), max_relative = 1e-7);
}

#[test]
fn tabulated_profile_validation() {
    let ok = tabulate(&CostProfile::Quadratic, 10, 3.0);
    let knots = ok.knots().to_vec();
    let col = |v: f64| alloc::vec![v; knots.len()];
    assert!(TabulatedProfile::new("bad", knots[..3].to_vec(), [col(0.0), col(0.0), col(0.0), col(0.0), col(0.0)]).is_err());
    // f' not increasing
    assert!(TabulatedProfile::new("bad", knots.clone(), [col(0.0), col(0.0), col(1.0), col(0.0), col(0.0)]).is_err());
}

proptest! {
    #[test]
    fn c_exp_round_trip(seed in 0u64..10_000, s in 0.0f64..3.1) {
        let mut rng = Rng64::seed_from_u64(seed);
        let x = random_point(&mut rng, 3 + (seed % 3) as usize);
        let p = random_unit_tangent(&mut rng, &x).scale(s);
        for prof in profiles() {
            let y = c_exp(&prof, &p).unwrap();
            let q = minus_grad_x(&prof, &x, &y).unwrap();
            prop_assert!(q.add_scaled(-1.0, &p).norm() <= 1e-9 * (1.0 + s));
        }
    }

    #[test]
    fn hessian_xx_is_symmetric(seed in 0u64..10_000, d in 0.01f64..3.0) {
        let mut rng = Rng64::seed_from_u64(seed);
        let x = random_point(&mut rng, 4);
        let y = at_distance(&mut rng, &x, d);
        let (a, b) = (random_tangent(&mut rng, &x), random_tangent(&mut rng, &x));
        for prof in profiles() {
            let ab = hessian_xx_form(&prof, &x, &y, &a, &b).unwrap();
            let ba = hessian_xx_form(&prof, &x, &y, &b, &a).unwrap();
            prop_assert!((ab - ba).abs() <= 1e-12 * (1.0 + ab.abs()));
        }
    }
}
