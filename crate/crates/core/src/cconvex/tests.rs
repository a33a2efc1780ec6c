use super::*;
use crate::sampling::{random_point, Rng64};
use crate::sphere::fibonacci_grid;
use alloc::vec;
use approx::assert_relative_eq;
use core::f64::consts::PI;
use rand::SeedableRng;

fn profiles() -> [CostProfile; 2] {
    [CostProfile::Quadratic, CostProfile::AntennaLog]
}

fn grid(count: usize) -> SphereGrid {
    SphereGrid::fibonacci(3, count).unwrap()
}

#[test]
fn evaluation_basics() {
    let mut rng = Rng64::seed_from_u64(1);
    for p in profiles() {
        let y0 = random_point(&mut rng, 3);
        let single = CConvexPotential::single(p.clone(), y0.clone(), 0.0);
        let doubled = CConvexPotential::new(p.clone(), vec![Support::new(y0.clone(), 0.0), Support::new(y0.clone(), -1.0)]).unwrap();
        assert_eq!(doubled.supports().len(), 1);
        for _ in 0..50 {
            let x = random_point(&mut rng, 3);
            assert_eq!(single.value(&x), -p.eval(&x, &y0));
            assert_eq!(doubled.value(&x), single.value(&x));
        }
        let phi = CConvexPotential::new(
            p.clone(),
            (0..5).map(|k| Support::new(random_point(&mut rng, 3), 0.1 * k as f64)).collect(),
        )
        .unwrap();
        for x in fibonacci_grid(3, 500).unwrap() {
            let e = phi.evaluate(&x);
            assert!(!e.active.is_empty());
            for (i, s) in phi.supports().iter().enumerate() {
                assert!(e.value >= s.a - p.eval(&x, &s.y));
                assert_eq!(e.active.contains(&i), s.a - p.eval(&x, &s.y) >= e.value - 1e-10);
            }
        }
    }
    assert!(CConvexPotential::new(CostProfile::Quadratic, vec![]).is_err());
}

#[test]
fn pruning_drops_dominated_supports() {
    let y = SpherePoint::new(vec![0.0, 0.0, 1.0]).unwrap();
    let z = SpherePoint::new(vec![0.0, 1.0, 0.0]).unwrap();
    let phi = CConvexPotential::new(CostProfile::Quadratic, vec![Support::new(y, 0.0), Support::new(z, -100.0)]).unwrap();
    assert_eq!(phi.prune_dominated(&grid(500)).supports().len(), 1);
}

#[test]
fn c_transform_of_a_single_support() {
    let mut points = fibonacci_grid(3, 2000).unwrap();
    let y0 = points[17].clone();
    points.push(y0.clone());
    let g = SphereGrid::from_points(points).unwrap();
    for p in profiles() {
        let phi = CConvexPotential::single(p.clone(), y0.clone(), 0.0);
        let values = phi.on_grid(&g);
        let phic = c_transform(&p, &g, &values, &g).unwrap();
        assert_eq!(phic[17], 0.0);
        let phicc = c_transform(&p, &g, &phic, &g).unwrap();
        for (a, b) in phicc.iter().zip(&values) {
            assert!(*a <= *b + 1e-12);
        }
    }
}

#[test]
fn double_transform_recovers_two_support_potential() {
    let g = grid(4000);
    let mut rng = Rng64::seed_from_u64(2);
    let cfg = random_ridge_configuration(&CostProfile::Quadratic, 3, 0.3, &mut rng).unwrap();
    let phi = &cfg.potential;
    let values = phi.on_grid(&g);
    let phicc = c_transform(phi.profile(), &g, &c_transform(phi.profile(), &g, &values, &g).unwrap(), &g).unwrap();
    let worst = phicc.iter().zip(&values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(worst <= 2.0 * phi.lipschitz_bound() * g.spacing(), "{worst}");
    assert!(phicc.iter().zip(&values).all(|(a, b)| *a <= *b + 1e-12));
}

#[test]
fn single_support_contact_set_is_the_support() {
    let g = grid(3000);
    for p in profiles() {
        let y0 = g.point(123).clone();
        let phi = CConvexPotential::single(p.clone(), y0.clone(), 0.0);
        let x = g.point(2000).clone();
        let tol = contact_tolerance(&phi, &x, &g).unwrap();
        let contact = contact_set(&phi, &x, &g, tol);
        let pts = contact.points(&g);
        assert!(pts.iter().all(|q| distance(q, &y0) <= 2.0 * g.spacing()), "{p:?} {tol} {:?}", pts.iter().map(|q| distance(q, &y0) / g.spacing()).collect::<Vec<_>>());
        assert!(contact.members.contains(&123));
        let sub = phi.subdifferential(&x).unwrap();
        assert!(sub.is_singleton());
    }
}

#[test]
fn ridge_contact_sets_follow_the_c_segment() {
    let g = grid(8000);
    let mut rng = Rng64::seed_from_u64(3);
    for p in profiles() {
        for _ in 0..4 {
            let cfg = random_ridge_configuration(&p, 3, 0.3, &mut rng).unwrap();
            let phi = &cfg.potential;
            let e = phi.evaluate(&cfg.x);
            assert_eq!(e.active, vec![0, 1]);
            let tol = contact_tolerance(phi, &cfg.x, &g).unwrap();
            let contact = contact_set(phi, &cfg.x, &g, tol);
            let seg = segment_points(&p, &cfg.x, &phi.supports()[0].y, &phi.supports()[1].y, 400).unwrap();
            // members hug the segment; coverage is checked away from the
            // endpoints, where the deficit grows only linearly
            let pts = contact.points(&g);
            let h = g.spacing();
            assert!(directed_hausdorff(&pts, &seg) <= 2.0 * h, "{p:?}");
            assert!(directed_hausdorff(&seg[40..360], &pts) <= 2.0 * h, "{p:?}");
            assert!(hausdorff_to_segment(&pts, &seg) < 8.0 * h);
            let v = verify_subdiff_eq_csubdiff(phi, &cfg.x, &g, 1e-6).unwrap();
            assert!(v.passed, "{v:?}");
            let mid = pullback_midpoint_check(phi, &contact, &g, 50, tol).unwrap();
            assert!(mid.passed, "{mid:?}");
        }
    }
}

#[test]
fn off_ridge_contact_set_is_a_singleton_neighbourhood() {
    let g = grid(5000);
    let mut rng = Rng64::seed_from_u64(4);
    let cfg = random_ridge_configuration(&CostProfile::Quadratic, 3, 0.3, &mut rng).unwrap();
    let phi = &cfg.potential;
    let y0 = &phi.supports()[0].y;
    // a point strictly inside the first cell
    let x = crate::sphere::exp_map(&log_map(y0, &cfg.x).unwrap().scale(0.5));
    assert_eq!(phi.evaluate(&x).active, vec![0]);
    let contact = contact_set(phi, &x, &g, contact_tolerance(phi, &x, &g).unwrap());
    assert!(contact.points(&g).iter().all(|q| distance(q, y0) <= 2.0 * g.spacing()));
    assert!(!contact.members.is_empty());
}

#[test]
fn control_potential_fails_verification() {
    let g = grid(5000);
    let mut rng = Rng64::seed_from_u64(5);
    for p in profiles() {
        let cfg = random_ridge_configuration(&p, 3, 0.3, &mut rng).unwrap();
        let targets: Vec<SpherePoint> = cfg.potential.supports().iter().map(|s| s.y.clone()).collect();
        let control = ControlPotential::tied_at(p.clone(), &targets, &cfg.x);
        assert_eq!(control.active_gradients(&cfg.x).unwrap().len(), 2);
        let v = verify_subdiff_eq_csubdiff(&control, &cfg.x, &g, 1e-6).unwrap();
        assert!(!v.passed);
        assert!(v.witness.is_some());
    }
}

#[test]
fn classifier_on_segment_midpoints_and_supports() {
    let g = grid(6000);
    let mut rng = Rng64::seed_from_u64(6);
    for p in profiles() {
        let cfg = random_ridge_configuration(&p, 3, 0.3, &mut rng).unwrap();
        let phi = &cfg.potential;
        let (y0, y1) = (&phi.supports()[0].y, &phi.supports()[1].y);
        let mid = c_segment_midpoint(&p, &cfg.x, y0, y1);
        let tol = contact_tolerance(phi, &cfg.x, &g).unwrap();
        let report = critical_point_classifier(phi, &mid, &g, tol);
        assert!(report.passed, "{:?}", (report.max_to_antipode, report.minimum_gap, report.spurious_maxima.len()));
        let best = report.minima.iter().min_by(|a, b| a.refined_value.total_cmp(&b.refined_value)).unwrap();
        assert!(distance(&best.point, &cfg.x) <= 2.0 * g.spacing());

        // y = y₀: h ≡ a₀ on the first cell
        let report = critical_point_classifier(phi, y0, &g, tol);
        assert!(report.passed);
        assert_relative_eq!(report.global_min, phi.supports()[0].a, epsilon = 1e-12);
    }
}

fn c_segment_midpoint(p: &CostProfile, x: &SpherePoint, y0: &SpherePoint, y1: &SpherePoint) -> SpherePoint {
    crate::cost::c_segment(p, x, y0, y1, 0.5).unwrap()
}

#[test]
fn antipodal_support_is_rejected() {
    let x = SpherePoint::new(vec![1.0, 0.0, 0.0]).unwrap();
    let phi = CConvexPotential::single(CostProfile::Quadratic, x.antipode(), 0.0);
    let g = grid(200);
    assert!(matches!(verify_subdiff_eq_csubdiff(&phi, &x, &g, 1e-6), Err(Error::AntipodalEndpoint) | Err(Error::CutLocus { .. })));
}

#[test]
fn quadratic_subdifferential_stays_in_the_closed_ball() {
    let mut rng = Rng64::seed_from_u64(7);
    for _ in 0..50 {
        let cfg = random_ridge_configuration(&CostProfile::Quadratic, 4, 0.05, &mut rng).unwrap();
        let sub = cfg.potential.subdifferential(&cfg.x).unwrap();
        assert_eq!(sub.vertices.len(), 2);
        assert!(sub.vertices.iter().all(|v| v.norm() <= PI));
        assert_eq!(sub.sample(7).len(), 2 + 7);
    }
}
