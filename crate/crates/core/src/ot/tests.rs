use super::*;
use crate::sampling::{random_point, Rng64};
use crate::sphere::fibonacci_grid;
use alloc::vec;
use approx::assert_relative_eq;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

fn profiles() -> [CostProfile; 2] {
    [CostProfile::Quadratic, CostProfile::AntennaLog]
}

fn cloud(rng: &mut Rng64, count: usize) -> Vec<SpherePoint> {
    (0..count).map(|_| random_point(rng, 3)).collect()
}

/// Minimum over all permutations by recursive enumeration.
fn brute_force(cost: &CostMatrix) -> f64 {
    fn go(cost: &CostMatrix, row: usize, used: &mut Vec<bool>, acc: f64, best: &mut f64) {
        if row == cost.rows {
            *best = best.min(acc);
            return;
        }
        for j in 0..cost.cols {
            if !used[j] {
                used[j] = true;
                go(cost, row + 1, used, acc + cost.at(row, j), best);
                used[j] = false;
            }
        }
    }
    let mut best = f64::INFINITY;
    go(cost, 0, &mut vec![false; cost.cols], 0.0, &mut best);
    best / cost.rows as f64
}

fn certify(plan: &TransportPlan, p: &CostProfile) {
    assert!(plan.marginal_residual() <= 1e-9, "{}", plan.marginal_residual());
    assert!(plan.dual_feasibility(p) >= -1e-8, "{}", plan.dual_feasibility(p));
    assert!(plan.slackness_violation(p) <= 1e-7, "{}", plan.slackness_violation(p));
    assert!(plan.duality_gap().abs() <= 1e-8, "{}", plan.duality_gap());
    assert_eq!(plan.dual_phi[0], 0.0);
}

#[test]
fn measure_merges_duplicates_and_normalises() {
    let a = SpherePoint::new(vec![1.0, 0.0, 0.0]).unwrap();
    let b = SpherePoint::new(vec![0.0, 1.0, 0.0]).unwrap();
    let a2 = SpherePoint::new(vec![1.0, 1e-12, 0.0]).unwrap();
    let m = DiscreteMeasure::normalized(vec![a.clone(), b.clone(), a2], vec![1.0, 2.0, 1.0]).unwrap();
    assert_eq!(m.len(), 2);
    assert_eq!(m.weights(), &[0.5, 0.5]);
    assert!(DiscreteMeasure::new(vec![a.clone(), b.clone()], vec![0.5, 0.6]).is_err());
    assert!(DiscreteMeasure::new(vec![a.clone(), b.clone()], vec![-0.5, 1.5]).is_err());
    assert!(DiscreteMeasure::new(vec![], vec![]).is_err());
    let u = DiscreteMeasure::uniform(vec![a, b]).unwrap();
    assert_relative_eq!(u.weights().iter().sum::<f64>(), 1.0, epsilon = 1e-12);
}

#[test]
fn identical_measures_give_the_identity() {
    let pts = fibonacci_grid(3, 10).unwrap();
    let mu = DiscreteMeasure::uniform(pts).unwrap();
    for p in profiles() {
        let plan = solve_exact(&mu, &mu, &p).unwrap();
        assert_eq!(plan.entries.len(), 10);
        assert!(plan.entries.iter().all(|e| e.i == e.j));
        assert_relative_eq!(plan.total_cost, p.f(0.0), epsilon = 1e-15);
        let map = extract_map(&plan);
        assert_eq!(map.assignment, (0..10).map(Some).collect::<Vec<_>>());
        assert!(check_c_monotone(&plan.support_pairs(), &p).passed);
        certify(&plan, &p);
    }
}

#[test]
fn exact_solver_matches_permutation_oracle() {
    let mut rng = Rng64::seed_from_u64(11);
    for p in profiles() {
        for _ in 0..25 {
            let mu0 = DiscreteMeasure::uniform(cloud(&mut rng, 6)).unwrap();
            let mu1 = DiscreteMeasure::uniform(cloud(&mut rng, 6)).unwrap();
            let plan = solve_exact(&mu0, &mu1, &p).unwrap();
            let oracle = brute_force(&cost_matrix(&p, &mu0, &mu1));
            assert!((plan.total_cost - oracle).abs() <= 1e-10, "{} vs {oracle}", plan.total_cost);
            certify(&plan, &p);
            let check = check_c_monotone(&plan.support_pairs(), &p);
            assert!(check.worst_margin >= -1e-9);
            let map = extract_map(&plan);
            assert!(map.is_total());
            assert!(gradient_relation_gap(&plan, &map, &p).unwrap() <= 1e-6);
            let images = map.images(&mu1).unwrap();
            assert!(pushforward_check(&images, &mu0, &mu1, 0.3).unwrap() <= 1e-12);
        }
    }
}

#[test]
fn unequal_weights_are_certified_by_the_duals() {
    let mut rng = Rng64::seed_from_u64(12);
    for p in profiles() {
        for (m, n) in [(7, 13), (40, 25), (120, 90)] {
            let mu0 = DiscreteMeasure::normalized(cloud(&mut rng, m), (0..m).map(|_| rng.random_range(0.1..1.0)).collect()).unwrap();
            let mu1 = DiscreteMeasure::normalized(cloud(&mut rng, n), (0..n).map(|_| rng.random_range(0.1..1.0)).collect()).unwrap();
            let plan = solve_exact(&mu0, &mu1, &p).unwrap();
            certify(&plan, &p);
            assert!(plan.entries.len() < m + n);
            assert!(check_c_monotone(&plan.support_pairs(), &p).passed);
        }
    }
}

#[test]
fn permuting_inputs_changes_nothing() {
    let mut rng = Rng64::seed_from_u64(13);
    let p = CostProfile::Quadratic;
    let (xs, ys) = (cloud(&mut rng, 30), cloud(&mut rng, 30));
    let plan = solve_exact(&DiscreteMeasure::uniform(xs.clone()).unwrap(), &DiscreteMeasure::uniform(ys.clone()).unwrap(), &p).unwrap();
    let mut order: Vec<usize> = (0..30).collect();
    order.shuffle(&mut rng);
    let xs2: Vec<SpherePoint> = order.iter().map(|&k| xs[k].clone()).collect();
    let plan2 = solve_exact(&DiscreteMeasure::uniform(xs2).unwrap(), &DiscreteMeasure::uniform(ys.clone()).unwrap(), &p).unwrap();
    assert!((plan.total_cost - plan2.total_cost).abs() <= 1e-12);
    let pairs = |pl: &TransportPlan| {
        let mut v: Vec<(Vec<u64>, usize)> = pl.entries.iter().map(|e| (pl.source.points()[e.i].coords().iter().map(|c| c.to_bits()).collect(), e.j)).collect();
        v.sort();
        v
    };
    assert_eq!(pairs(&plan), pairs(&plan2));
}

#[test]
fn forbidden_pairs_are_avoided_or_reported() {
    let a = SpherePoint::new(vec![0.0, 0.0, 1.0]).unwrap();
    let b = SpherePoint::new(vec![1.0, 0.0, 0.0]).unwrap();
    // antenna cost is infinite at antipodes; the solver routes around them
    let mu0 = DiscreteMeasure::uniform(vec![a.clone(), b.clone()]).unwrap();
    let mu1 = DiscreteMeasure::uniform(vec![a.antipode(), b.clone()]).unwrap();
    let plan = solve_exact(&mu0, &mu1, &CostProfile::AntennaLog).unwrap();
    assert!(plan.entries.iter().all(|e| !(e.i == 0 && e.j == 0)));
    // a single forced antipodal pair cannot be avoided
    let forced = solve_exact(&DiscreteMeasure::uniform(vec![a.clone()]).unwrap(), &DiscreteMeasure::uniform(vec![a.antipode()]).unwrap(), &CostProfile::AntennaLog);
    assert!(matches!(forced, Err(Error::CutLocus { .. })));
}

#[test]
fn oversize_problems_are_rejected() {
    let pts = fibonacci_grid(3, EXACT_LIMIT + 1).unwrap();
    let mu = DiscreteMeasure::uniform(pts).unwrap();
    assert!(matches!(solve_exact(&mu, &mu, &CostProfile::Quadratic), Err(Error::TooLarge(_))));
}

#[test]
fn swapped_assignment_fails_monotonicity() {
    let x1 = SpherePoint::new(vec![1.0, 0.0, 0.0]).unwrap();
    let x2 = SpherePoint::new(vec![0.0, 1.0, 0.0]).unwrap();
    let y1 = SpherePoint::new(vec![0.9, 0.1, 0.0]).unwrap();
    let y2 = SpherePoint::new(vec![0.1, 0.9, 0.0]).unwrap();
    for p in profiles() {
        let good = check_c_monotone(&[(x1.clone(), y1.clone()), (x2.clone(), y2.clone())], &p);
        assert!(good.passed && good.worst_margin > 0.0);
        let bad = check_c_monotone(&[(x1.clone(), y2.clone()), (x2.clone(), y1.clone())], &p);
        assert!(!bad.passed);
        assert_eq!(bad.worst_pair, Some((0, 1)));
        assert_relative_eq!(bad.worst_margin, -good.worst_margin, epsilon = 1e-12);
    }
}

#[test]
fn corrupted_map_breaks_the_pushforward() {
    let mut rng = Rng64::seed_from_u64(14);
    let mu0 = DiscreteMeasure::uniform(cloud(&mut rng, 20)).unwrap();
    let mu1 = DiscreteMeasure::uniform(cloud(&mut rng, 20)).unwrap();
    let plan = solve_exact(&mu0, &mu1, &CostProfile::Quadratic).unwrap();
    let mut images = extract_map(&plan).images(&mu1).unwrap();
    assert!(pushforward_check(&images, &mu0, &mu1, 0.2).unwrap() <= 1e-12);
    images[3] = images[4].clone();
    assert!(pushforward_check(&images, &mu0, &mu1, 0.2).unwrap() >= 0.05 - 1e-12);
}

#[test]
fn entropic_solution_approaches_the_exact_cost() {
    let mut rng = Rng64::seed_from_u64(15);
    for p in profiles() {
        let mu0 = DiscreteMeasure::uniform(cloud(&mut rng, 6)).unwrap();
        let mu1 = DiscreteMeasure::uniform(cloud(&mut rng, 6)).unwrap();
        let exact = solve_exact(&mu0, &mu1, &p).unwrap().total_cost;
        let mut last_gap = f64::INFINITY;
        for eps in [1e-1, 3e-2, 1e-2, 3e-3, 1e-3] {
            let run = solve_entropic(&mu0, &mu1, &p, eps, 20_000).unwrap();
            assert!(run.plan.marginal_residual() <= 1e-10, "{}", run.plan.marginal_residual());
            let gap = run.plan.total_cost - exact;
            assert!(run.converged, "{eps}: residual {}", run.residual);
            assert!(gap >= -1e-12);
            assert!(gap <= last_gap + 1e-12, "{eps}: {gap} > {last_gap}");
            last_gap = gap;
        }
        assert!(last_gap <= 1e-2);
    }
}

#[test]
fn entropic_identity_costs_little() {
    let mu = DiscreteMeasure::uniform(fibonacci_grid(3, 40).unwrap()).unwrap();
    for p in profiles() {
        let eps = 1e-3;
        let run = solve_entropic(&mu, &mu, &p, eps, 5000).unwrap();
        assert!(run.converged);
        assert!(run.plan.total_cost - p.f(0.0) <= eps * (40f64).ln());
        let map = extract_map(&run.plan);
        assert!(map.is_total());
        let images = map.images(&mu).unwrap();
        assert!(pushforward_check(&images, &mu, &mu, 0.3).unwrap() <= 1e-6);
    }
}

#[test]
fn entropic_flags_an_unconverged_run() {
    let mut rng = Rng64::seed_from_u64(16);
    let mu0 = DiscreteMeasure::uniform(cloud(&mut rng, 8)).unwrap();
    let mu1 = DiscreteMeasure::uniform(cloud(&mut rng, 8)).unwrap();
    let run = solve_entropic(&mu0, &mu1, &CostProfile::Quadratic, 1e-3, 2).unwrap();
    assert!(!run.converged);
    assert_eq!(run.iterations, 2);
    assert!(run.plan.marginal_residual() <= 1e-12);
    assert!(solve_entropic(&mu0, &mu1, &CostProfile::Quadratic, 0.0, 2).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn exact_plans_are_certified(seed in any::<u64>(), m in 2usize..12, n in 2usize..12) {
        let mut rng = Rng64::seed_from_u64(seed);
        let mu0 = DiscreteMeasure::normalized(cloud(&mut rng, m), (0..m).map(|_| rng.random_range(0.05..1.0)).collect()).unwrap();
        let mu1 = DiscreteMeasure::normalized(cloud(&mut rng, n), (0..n).map(|_| rng.random_range(0.05..1.0)).collect()).unwrap();
        let p = CostProfile::Quadratic;
        let plan = solve_exact(&mu0, &mu1, &p).unwrap();
        prop_assert!(plan.marginal_residual() <= 1e-9);
        prop_assert!(plan.dual_feasibility(&p) >= -1e-8);
        prop_assert!(plan.slackness_violation(&p) <= 1e-7);
        prop_assert!(plan.duality_gap().abs() <= 1e-8);
    }
}
