//! The pipelines behind each command. Every pipeline returns its checks,
//! a JSON summary and the tables and files to write.

use std::f64::consts::PI;

use serde_json::json;
use spherot_core::cconvex::{
    c_transform, contact_set, contact_tolerance, critical_point_classifier, directed_hausdorff, hausdorff_to_segment, random_ridge_configuration,
    segment_points, verify_subdiff_eq_csubdiff, CConvexPotential, ControlPotential,
};
use spherot_core::cost::c_segment;
use spherot_core::grid::{sphere_area, SphereGrid};
use spherot_core::mtw::{certify_as, inequality_constants, MtwReport};
use spherot_core::ot::{check_c_monotone, extract_map, solve_entropic, solve_exact, DiscreteMeasure, TransportPlan};
use spherot_core::regularity::{
    density_floor, growth_condition, holder_exponent, lemma_del_loep_check, ma_residual, ma_self_consistency, mass_bound_check, radius_grid,
    sigma_lower_bound, stay_away, ChartPotential, Convention, GrowthCondition,
};
use spherot_core::sampling::{random_point, stream_rng};
use spherot_core::sphere::{distance, exp_map, fibonacci_grid, log_map, orthonormal_frame};
use spherot_core::{CostProfile, OriginalAntenna, PairCost, SpherePoint, Tolerances};

use crate::config::{Command, ExperimentConfig};
use crate::error::{CoreContext, Result};
use crate::formats::{self, PlanSidecar, PotentialFile};
use crate::report::{Check, PlotData, Relation, StayAwayFamily, Table, GrowthFamily};

/// Random streams used by the pipelines, kept apart from the per-sample
/// streams of curvature scans.
const SOURCE_STREAM: u64 = 1 << 40;
const POINT_STREAM: u64 = (1 << 40) + 1;
const POTENTIAL_STREAM: u64 = (1 << 40) + 2;
const RIDGE_STREAM: u64 = 1 << 41;

/// Sweep cap of the entropic solver.
const ENTROPIC_ROUNDS: usize = 200_000;
/// Concentration parameters of the diagnose family.
pub const LAMBDAS: [f64; 3] = [0.0, 0.5, 0.9];
/// Points of the c-segment used as the reference curve.
const SEGMENT_POINTS: usize = 400;
/// Pairs sampled by the pairwise distance inequality.
const DEL_LOEP_PAIRS: usize = 2000;
/// Random balls of the mass bound.
const MASS_BALLS: usize = 100;
/// Tolerance of the Monge–Ampère identity case.
pub const MA_IDENTITY_TOL: f64 = 1e-6;
/// Tolerance of the self-consistent Monge–Ampère residual.
pub const MA_SELF_TOL: f64 = 1e-4;
/// Shift of the linear chart potential in the self-consistency check.
const MA_SHIFT: f64 = 0.1;
/// Scalar inequality floors reported next to the measured infima.
pub const UTIL1_FLOOR: f64 = 0.3;
pub const UTIL2_FLOOR: f64 = 0.6;
/// Allowed rounding below zero for the trigonometric minimum.
pub const TRIG_TOL: f64 = 1e-10;

/// What a pipeline produced.
#[derive(Debug, Default)]
pub struct Outcome {
    pub checks: Vec<Check>,
    pub details: serde_json::Value,
    pub tables: Vec<Table>,
    /// Extra files as `(name, contents)`.
    pub files: Vec<(String, String)>,
}

/// Resolved inputs shared by all pipelines.
pub struct Context<'a> {
    pub config: &'a ExperimentConfig,
    pub profile: CostProfile,
    pub tol: Tolerances,
}

impl Context<'_> {
    fn grid(&self) -> usize {
        self.config.grid.unwrap_or(2)
    }

    fn points(&self) -> usize {
        self.config.points.unwrap_or(2)
    }

    fn samples(&self) -> usize {
        self.config.samples.unwrap_or(1)
    }

    fn dim(&self) -> usize {
        self.config.dim
    }

    fn seed(&self) -> u64 {
        self.config.seed
    }

    fn sphere_grid(&self) -> Result<SphereGrid> {
        SphereGrid::fibonacci(self.dim(), self.grid()).context(|| "building evaluation grid".into())
    }

    /// Source from file, or seeded uniform random points.
    fn source(&self) -> Result<DiscreteMeasure> {
        match &self.config.source {
            Some(path) => formats::read_point_cloud(path, Some(self.dim())),
            None => {
                let mut rng = stream_rng(self.seed(), SOURCE_STREAM);
                let points = (0..self.points()).map(|_| random_point(&mut rng, self.dim())).collect();
                DiscreteMeasure::uniform(points).context(|| "synthetic source".into())
            }
        }
    }

    /// Target from file, or a uniform Fibonacci cloud.
    fn target(&self) -> Result<DiscreteMeasure> {
        match &self.config.target {
            Some(path) => formats::read_point_cloud(path, Some(self.dim())),
            None => uniform_cloud(self.dim(), self.points()),
        }
    }
}

pub fn run_pipeline(ctx: &Context) -> Result<Outcome> {
    match ctx.config.command {
        Command::MtwScan => mtw_scan(ctx),
        Command::Inequalities => inequalities(ctx),
        Command::Solve => solve(ctx),
        Command::Diagnose => diagnose(ctx),
        Command::ContactVerify => contact_verify(ctx),
        Command::TransformCheck => transform_check(ctx),
        Command::Antenna => antenna(ctx),
    }
}

fn uniform_cloud(dim: usize, count: usize) -> Result<DiscreteMeasure> {
    let points = fibonacci_grid(dim, count).context(|| "Fibonacci cloud".into())?;
    DiscreteMeasure::uniform(points).context(|| "uniform cloud".into())
}

/// Uniform cloud pulled towards the last basis vector by scaling geodesic
/// distances from it by `1 − λ`.
pub fn concentrated_cloud(dim: usize, count: usize, lambda: f64) -> Result<DiscreteMeasure> {
    let pole = SpherePoint::basis(dim, dim - 1).context(|| "pole".into())?;
    let points = fibonacci_grid(dim, count)
        .context(|| "Fibonacci cloud".into())?
        .into_iter()
        .map(|p| log_map(&pole, &p).map_or(p, |v| exp_map(&v.scale(1.0 - lambda))))
        .collect();
    DiscreteMeasure::uniform(points).context(|| format!("source with lambda = {lambda}"))
}

fn mtw_table(report: &MtwReport) -> Table {
    let mut t = Table::new(
        "mtw_samples.csv",
        format!("seeded curvature queries for profile {}", report.profile),
        &[
            ("sample", "index of the seeded query"),
            ("r", "distance d(x, y)"),
            ("c_ratio", "cosine between xi and the direction to y"),
            ("t", "coordinate of nu along the direction to y"),
            ("value", "curvature value at the query"),
        ],
    );
    for (k, row) in report.rows.iter().enumerate() {
        t.push(&[k as f64, row.r, row.c_ratio, row.t, row.value]);
    }
    t
}

fn mtw_summary(report: &MtwReport) -> serde_json::Value {
    let (r, c_ratio, t) = report.argmin.coordinates();
    json!({
        "profile": report.profile,
        "route": report.route,
        "samples": report.samples,
        "margin": report.margin,
        "c0_estimate": report.c0_estimate,
        "min_value": report.min_value,
        "argmin_index": report.argmin_index,
        "argmin": { "r": r, "c_ratio": c_ratio, "t": t },
    })
}

fn certify(ctx: &Context, profile: &CostProfile) -> Result<MtwReport> {
    certify_as(profile, ctx.dim(), ctx.config.sigma, ctx.samples(), ctx.seed()).context(|| format!("curvature scan for {}", profile.name()))
}

fn mtw_scan(ctx: &Context) -> Result<Outcome> {
    let report = certify(ctx, &ctx.profile)?;
    let mut tables = vec![mtw_table(&report)];
    tables.extend(report.plot_tables());
    Ok(Outcome {
        checks: vec![Check::new("c0_estimate", report.c0_estimate, Relation::Greater, 0.0)],
        details: mtw_summary(&report),
        tables,
        files: Vec::new(),
    })
}

fn inequalities(ctx: &Context) -> Result<Outcome> {
    let c = inequality_constants(ctx.grid());
    let checks = vec![
        Check::new("inf_sin_minus_r_cos_over_r3", c.c_util1, Relation::AtLeast, 0.0),
        Check::new("inf_r_minus_sin_cos_over_r3", c.c_util2, Relation::AtLeast, 0.0),
        Check::new("min_trig_polynomial", c.min_trig, Relation::AtLeast, -TRIG_TOL),
    ];
    let details = json!({
        "grid": ctx.grid(),
        "c_util1": c.c_util1,
        "argmin_util1": c.argmin_util1,
        "c_util2": c.c_util2,
        "argmin_util2": c.argmin_util2,
        "min_trig": c.min_trig,
        "argmin_trig": c.argmin_trig,
        "taylor_limits": { "util1": 1.0 / 3.0, "util2": 2.0 / 3.0 },
        "floors": {
            "util1": UTIL1_FLOOR,
            "util2": UTIL2_FLOOR,
            "util1_met": c.c_util1 >= UTIL1_FLOOR,
            "util2_met": c.c_util2 >= UTIL2_FLOOR,
        },
    });
    let mut t = Table::new(
        "inequalities.csv",
        "scalar inequalities on (0, pi]",
        &[
            ("r", "distance"),
            ("util1", "(sin r - r cos r) / r^3"),
            ("util2", "(r - sin r cos r) / r^3"),
            ("trig", "(r sin 2r + 3 cos 2r + 4 r^2 - 3) / 2"),
        ],
    );
    let steps = 1024;
    for k in 1..=steps {
        let r = PI * k as f64 / steps as f64;
        let r3 = r * r * r;
        t.push(&[
            r,
            (r.sin() - r * r.cos()) / r3,
            (r - r.sin() * r.cos()) / r3,
            0.5 * (r * (2.0 * r).sin() + 3.0 * (2.0 * r).cos() + 4.0 * r * r - 3.0),
        ]);
    }
    Ok(Outcome { checks, details, tables: vec![t], files: Vec::new() })
}

fn plan_files(plan: &TransportPlan, profile: &CostProfile) -> Result<Vec<(String, String)>> {
    Ok(vec![
        ("plan.csv".into(), formats::plan_csv(plan)?),
        ("plan.json".into(), serde_json::to_string_pretty(&PlanSidecar::new(plan, profile))? + "\n"),
        ("source.txt".into(), formats::write_point_cloud(&plan.source)),
        ("target.txt".into(), formats::write_point_cloud(&plan.target)),
    ])
}

fn solve(ctx: &Context) -> Result<Outcome> {
    let (mu0, mu1) = (ctx.source()?, ctx.target()?);
    let p = &ctx.profile;
    let mut checks = Vec::new();
    let (plan, mode, iterations) = match ctx.config.epsilon {
        None => (solve_exact(&mu0, &mu1, p).context(|| "exact transport".into())?, "exact", 0),
        Some(eps) => {
            let run = solve_entropic(&mu0, &mu1, p, eps, ENTROPIC_ROUNDS).context(|| "entropic transport".into())?;
            checks.push(Check::flag("entropic_converged", run.converged));
            (run.plan, "entropic", run.iterations)
        }
    };
    checks.push(Check::new("marginal_residual", plan.marginal_residual(), Relation::AtMost, ctx.tol.marginal));
    let pairs = plan.support_pairs();
    let monotone = check_c_monotone(&pairs, p);
    if mode == "exact" {
        checks.push(Check::new("dual_feasibility", plan.dual_feasibility(p), Relation::AtLeast, -ctx.tol.dual_feasibility));
        checks.push(Check::new("complementary_slackness", plan.slackness_violation(p), Relation::AtMost, ctx.tol.complementary_slackness));
        checks.push(Check::new("c_monotone_margin", monotone.worst_margin, Relation::AtLeast, -ctx.tol.monotone_margin));
    }
    let stay = stay_away(&plan, Convention::Reduced).context(|| "stay-away margin".into())?;
    checks.push(Check::new("sigma_observed", stay.sigma_observed, Relation::Greater, 0.0));
    let map = extract_map(&plan);
    let mut map_table = Table::new(
        "map.csv",
        "single-valued rows of the plan",
        &[("i", "source index"), ("j", "target index"), ("distance", "geodesic distance d(x_i, y_j)")],
    );
    for (i, j) in map.assignment.iter().enumerate().filter_map(|(i, a)| a.map(|j| (i, j))) {
        map_table.push(&[i as f64, j as f64, distance(&mu0.points()[i], &mu1.points()[j])]);
    }
    let details = json!({
        "mode": mode,
        "epsilon": ctx.config.epsilon,
        "iterations": iterations,
        "source_points": plan.source.len(),
        "target_points": plan.target.len(),
        "entries": plan.entries.len(),
        "total_cost": plan.total_cost,
        "duality_gap": plan.duality_gap(),
        "c_monotone_margin": monotone.worst_margin,
        "split_rows": map.split_rows(),
        "sigma_observed": stay.sigma_observed,
        "sigma_lower_bound": stay.sigma_lower_bound,
    });
    Ok(Outcome { checks, details, tables: vec![map_table], files: plan_files(&plan, p)? })
}

fn diagnose(ctx: &Context) -> Result<Outcome> {
    let (p, dim, n) = (&ctx.profile, ctx.dim(), ctx.points());
    let intrinsic = dim - 1;
    let target = uniform_cloud(dim, n)?;
    let reference = ctx.sphere_grid()?;
    let m = density_floor(&target, &reference).context(|| "target density floor".into())?;
    let radii = radius_grid(PI / 64.0, PI / 2.0);
    let exponent = GrowthCondition::B.exponent(intrinsic);
    let mut checks = Vec::new();
    let mut stays = Vec::new();
    let mut growths = Vec::new();
    let mut family = Vec::new();
    for (k, &lambda) in LAMBDAS.iter().enumerate() {
        let source = concentrated_cloud(dim, n, lambda)?;
        let plan = solve_exact(&source, &target, p).context(|| format!("transport for lambda = {lambda}"))?;
        let stay = stay_away(&plan, Convention::Reduced).context(|| "stay-away margin".into())?;
        let growth = growth_condition(&source, exponent, &radii).context(|| "growth condition".into())?;
        checks.push(Check::new(format!("sigma_observed[lambda={lambda}]"), stay.sigma_observed, Relation::Greater, 0.0));
        checks.push(Check::new(format!("sigma_lower_bound[lambda={lambda}]"), stay.sigma_lower_bound, Relation::Greater, 0.0));
        let map = extract_map(&plan);
        let mut entry = json!({
            "lambda": lambda,
            "sigma_observed": stay.sigma_observed,
            "sigma_lower_bound": stay.sigma_lower_bound,
            "growth_log_slope": growth.log_slope,
            "growth_constant": growth.constant,
            "growth_condition_b": GrowthCondition::B.holds_for_slope(growth.log_slope),
            "split_rows": map.split_rows(),
        });
        checks.push(Check::new(format!("split_rows[lambda={lambda}]"), map.split_rows() as f64, Relation::AtMost, 0.0));
        if let Some(images) = map.images(&target) {
            let dl = lemma_del_loep_check(source.points(), &images, DEL_LOEP_PAIRS, ctx.seed() + k as u64).context(|| "pairwise inequality".into())?;
            let mb =
                mass_bound_check(&source, &images, m, &reference, MASS_BALLS, ctx.seed() + k as u64).context(|| "mass bound".into())?;
            checks.push(Check::new(format!("del_loep_margin[lambda={lambda}]"), dl.min_margin, Relation::AtLeast, -ctx.tol.del_loep_slack));
            checks.push(Check::new(format!("mass_bound_margin[lambda={lambda}]"), mb.worst_margin, Relation::AtLeast, 0.0));
            entry["del_loep"] = json!({ "pairs": dl.pairs, "min_margin": dl.min_margin });
            entry["mass_bound"] = json!({
                "balls": mb.checks,
                "worst_margin": mb.worst_margin,
                "worst_ratio": mb.worst_ratio,
                "worst_slack": mb.worst_slack,
                "worst_radius": mb.worst_radius,
            });
        }
        family.push(entry);
        stays.push((lambda, stay));
        growths.push((lambda, growth));
    }

    // a point-mass source violates every growth condition
    let pole = SpherePoint::basis(dim, dim - 1).context(|| "pole".into())?;
    let control = DiscreteMeasure::uniform(vec![pole]).context(|| "point mass".into())?;
    let control_bound = sigma_lower_bound(&control, &target).context(|| "point-mass bound".into())?;
    let least_family_bound = stays.iter().map(|s| s.1.sigma_lower_bound).fold(f64::INFINITY, f64::min);
    checks.push(Check::new("control_sigma_lower_bound", control_bound, Relation::Less, least_family_bound));

    let mut holder = Table::new(
        "holder.csv",
        format!("Hölder exponents on the {intrinsic}-sphere"),
        &[("p", "integrability exponent"), ("alpha", "1 - dim/p"), ("beta", "alpha/(4 dim - 2 + alpha)")],
    );
    let ps: Vec<f64> = (1..=64).map(|k| intrinsic as f64 + 0.25 * k as f64).chain([f64::INFINITY]).collect();
    let exps = ps.iter().map(|&q| holder_exponent(intrinsic, q)).collect::<spherot_core::Result<Vec<_>>>().context(|| "Hölder exponents".into())?;
    ps.iter().zip(&exps).for_each(|(q, e)| holder.push(&[*q, e.0, e.1]));
    let increasing = exps.windows(2).all(|w| w[1].0 > w[0].0 && w[1].1 > w[0].1);
    checks.push(Check::flag("holder_strictly_increasing", increasing));

    let mut rng = stream_rng(ctx.seed(), POINT_STREAM);
    let x = random_point(&mut rng, dim);
    let frame = orthonormal_frame(&x, None).context(|| "chart frame".into())?;
    let rho0 = 1.0 / sphere_area(dim);
    let uniform = move |_: &SpherePoint| rho0;
    let zero = ChartPotential::zero(frame.clone(), 1.0).context(|| "zero potential".into())?;
    let identity = ma_residual(p, &zero, &uniform, &uniform, &x).context(|| "identity residual".into())?;
    let linear = ChartPotential::linear(frame, 1.0, MA_SHIFT).context(|| "linear potential".into())?;
    let (selfc, estimate) = ma_self_consistency(p, &linear, &uniform, &x, ctx.samples(), ctx.seed()).context(|| "self-consistent residual".into())?;
    checks.push(Check::new("ma_identity_residual", identity.residual.abs(), Relation::AtMost, MA_IDENTITY_TOL));
    checks.push(Check::new("ma_self_consistent_residual", selfc.residual.abs(), Relation::AtMost, MA_SELF_TOL));

    let details = json!({
        "points": n,
        "reference_points": reference.len(),
        "density_floor": m,
        "growth_exponent": exponent,
        "family": family,
        "sigma_observed_non_increasing": stays.windows(2).all(|w| w[1].1.sigma_observed <= w[0].1.sigma_observed),
        "control_sigma_lower_bound": control_bound,
        "holder_infinity": { "alpha": exps.last().map(|e| e.0), "beta": exps.last().map(|e| e.1) },
        "ma": {
            "identity": { "lhs": identity.lhs, "rhs": identity.rhs, "residual": identity.residual },
            "self_consistent": {
                "lhs": selfc.lhs,
                "rhs": selfc.rhs,
                "residual": selfc.residual,
                "pushforward_density": estimate.density,
                "samples": estimate.samples,
                "bandwidth": estimate.bandwidth,
            },
        },
    });
    let mut tables = StayAwayFamily(&stays).plot_tables();
    tables.extend(GrowthFamily(&growths).plot_tables());
    tables.push(holder);
    Ok(Outcome { checks, details, tables, files: Vec::new() })
}

/// Contact-set measurements for one ridge configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactMeasurement {
    /// Largest distance from a contact point to the c-segment.
    pub to_segment: f64,
    /// Largest distance from the central 80% of the segment to the contact set.
    pub coverage: f64,
    /// Symmetric Hausdorff distance between contact set and full segment.
    pub hausdorff: f64,
    pub members: usize,
    pub subdiff_passed: bool,
    pub subdiff_deficit: f64,
    pub critical_passed: bool,
}

/// Measures the contact set of `phi` at `x` against the c-segment of its
/// two supports, and classifies the critical points at the segment midpoint.
pub fn measure_contact(phi: &CConvexPotential, x: &SpherePoint, grid: &SphereGrid, verify_tol: f64) -> spherot_core::Result<ContactMeasurement> {
    let profile = phi.profile();
    let (y0, y1) = (&phi.supports()[0].y, &phi.supports()[1].y);
    let tol = contact_tolerance(phi, x, grid)?;
    let pts = contact_set(phi, x, grid, tol).points(grid);
    let seg = segment_points(profile, x, y0, y1, SEGMENT_POINTS)?;
    let inner = &seg[SEGMENT_POINTS / 10..SEGMENT_POINTS - SEGMENT_POINTS / 10];
    let verify = verify_subdiff_eq_csubdiff(phi, x, grid, verify_tol)?;
    let mid = c_segment(profile, x, y0, y1, 0.5)?;
    let critical = critical_point_classifier(phi, &mid, grid, tol);
    Ok(ContactMeasurement {
        to_segment: directed_hausdorff(&pts, &seg),
        coverage: directed_hausdorff(inner, &pts),
        hausdorff: hausdorff_to_segment(&pts, &seg),
        members: pts.len(),
        subdiff_passed: verify.passed,
        subdiff_deficit: verify.worst_deficit,
        critical_passed: critical.passed,
    })
}

fn contact_verify(ctx: &Context) -> Result<Outcome> {
    let p = &ctx.profile;
    let grid = ctx.sphere_grid()?;
    let h = grid.spacing();
    let count = ctx.config.configurations.unwrap_or(1);
    let verify_tol = ctx.tol.grid_min;
    let mut table = Table::new(
        "contact.csv",
        "contact sets of two-support potentials at ridge points",
        &[
            ("config", "configuration index"),
            ("to_segment", "largest distance from a contact point to the c-segment"),
            ("coverage", "largest distance from the central segment to the contact set"),
            ("hausdorff", "symmetric Hausdorff distance to the full segment"),
            ("members", "grid points in the contact set"),
            ("subdiff_deficit", "worst deficit of the subdifferential verification"),
            ("critical_passed", "1 if the critical-point classification passed"),
        ],
    );
    let mut all = Vec::with_capacity(count);
    let mut control_x = None;
    for k in 0..count {
        let mut rng = stream_rng(ctx.seed(), RIDGE_STREAM + k as u64);
        let cfg = random_ridge_configuration(p, ctx.dim(), ctx.config.sigma, &mut rng).context(|| format!("ridge configuration {k}"))?;
        let m = measure_contact(&cfg.potential, &cfg.x, &grid, verify_tol).context(|| format!("contact set {k}"))?;
        table.push(&[k as f64, m.to_segment, m.coverage, m.hausdorff, m.members as f64, m.subdiff_deficit, f64::from(u8::from(m.critical_passed))]);
        if control_x.is_none() {
            control_x = Some((cfg.potential.supports().iter().map(|s| s.y.clone()).collect::<Vec<_>>(), cfg.x.clone()));
        }
        all.push(m);
    }
    let worst = |f: fn(&ContactMeasurement) -> f64| all.iter().map(f).fold(0.0, f64::max);
    let mut checks = vec![
        Check::new("contact_to_segment", worst(|m| m.to_segment), Relation::AtMost, 2.0 * h),
        Check::new("segment_coverage", worst(|m| m.coverage), Relation::AtMost, 2.0 * h),
        Check::new("subdiff_failures", all.iter().filter(|m| !m.subdiff_passed).count() as f64, Relation::AtMost, 0.0),
        Check::new("critical_failures", all.iter().filter(|m| !m.critical_passed).count() as f64, Relation::AtMost, 0.0),
    ];
    let control = match control_x {
        Some((targets, x)) => {
            let c = ControlPotential::tied_at(p.clone(), &targets, &x);
            let v = verify_subdiff_eq_csubdiff(&c, &x, &grid, verify_tol).context(|| "control potential".into())?;
            checks.push(Check::flag("control_rejected", !v.passed));
            json!({ "passed": v.passed, "worst_deficit": v.worst_deficit })
        }
        None => serde_json::Value::Null,
    };
    let details = json!({
        "configurations": count,
        "grid_points": grid.len(),
        "grid_spacing": h,
        "worst_to_segment": worst(|m| m.to_segment),
        "worst_coverage": worst(|m| m.coverage),
        "worst_hausdorff": worst(|m| m.hausdorff),
        "worst_subdiff_deficit": worst(|m| m.subdiff_deficit),
        "control": control,
    });
    Ok(Outcome { checks, details, tables: vec![table], files: Vec::new() })
}

fn transform_check(ctx: &Context) -> Result<Outcome> {
    let p = &ctx.profile;
    let phi = match &ctx.config.potential {
        Some(path) => formats::read_potential(path, p)?,
        None => {
            let mut rng = stream_rng(ctx.seed(), POTENTIAL_STREAM);
            random_ridge_configuration(p, ctx.dim(), ctx.config.sigma, &mut rng).context(|| "random potential".into())?.potential
        }
    };
    let grid = ctx.sphere_grid()?;
    let values = phi.on_grid(&grid);
    let phic = c_transform(p, &grid, &values, &grid).context(|| "c-transform".into())?;
    let phicc = c_transform(p, &grid, &phic, &grid).context(|| "double c-transform".into())?;
    let gap = phicc.iter().zip(&values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let excess = phicc.iter().zip(&values).map(|(a, b)| a - b).fold(f64::NEG_INFINITY, f64::max);
    let bound = 2.0 * phi.lipschitz_bound() * grid.spacing();
    let checks = vec![
        Check::new("double_transform_gap", gap, Relation::AtMost, bound),
        Check::new("double_transform_excess", excess, Relation::AtMost, ctx.tol.grid_min),
    ];
    let mut table = Table::new(
        "transform.csv",
        "potential and its double c-transform on the grid",
        &[("index", "grid index"), ("phi", "potential value"), ("phi_cc", "double c-transform"), ("gap", "phi - phi_cc")],
    );
    for (k, (a, b)) in values.iter().zip(&phicc).enumerate() {
        table.push(&[k as f64, *a, *b, a - b]);
    }
    let details = json!({
        "supports": phi.supports().len(),
        "grid_points": grid.len(),
        "grid_spacing": grid.spacing(),
        "lipschitz_bound": phi.lipschitz_bound(),
        "max_gap": gap,
        "max_excess": excess,
    });
    let files = vec![("potential.json".into(), serde_json::to_string_pretty(&PotentialFile::from_potential(&phi))? + "\n")];
    Ok(Outcome { checks, details, tables: vec![table], files })
}

fn antenna(ctx: &Context) -> Result<Outcome> {
    let p = CostProfile::AntennaLog;
    let source = ctx.source()?;
    let original = ctx.target()?;
    // reduced variables: the original cost is the reduced one at −y
    let flipped = original.points().iter().map(SpherePoint::antipode).collect();
    let reduced = DiscreteMeasure::new(flipped, original.weights().to_vec()).context(|| "reduced target".into())?;
    let plan = solve_exact(&source, &reduced, &p).context(|| "antenna transport".into())?;
    let stay = stay_away(&plan, Convention::OriginalAntenna).context(|| "collision margin".into())?;
    let pairs: Vec<(SpherePoint, SpherePoint)> = plan.support_pairs().into_iter().map(|(x, y)| (x, y.antipode())).collect();
    let monotone = check_c_monotone(&pairs, &OriginalAntenna);
    let agreement = pairs.iter().map(|(x, y)| (OriginalAntenna.pair_cost(x, y) - OriginalAntenna::via_reduced(x, y)).abs()).fold(0.0, f64::max);
    let scan = certify(ctx, &p)?;
    let checks = vec![
        Check::new("collision_margin", stay.sigma_observed, Relation::Greater, 0.0),
        Check::new("original_monotone_margin", monotone.worst_margin, Relation::AtLeast, -ctx.tol.monotone_margin),
        Check::new("reduced_cost_agreement", agreement, Relation::AtMost, 1e-12),
        Check::new("c0_estimate", scan.c0_estimate, Relation::Greater, 0.0),
    ];
    let mut table = Table::new(
        "antenna_map.csv",
        "transport pairs in original antenna variables",
        &[("i", "source index"), ("j", "target index"), ("mass", "transported mass"), ("distance", "distance d(x_i, y_j) in original variables")],
    );
    for e in &plan.entries {
        table.push(&[e.i as f64, e.j as f64, e.mass, distance(&plan.source.points()[e.i], &original.points()[e.j])]);
    }
    let mut tables = vec![table];
    tables.extend(scan.plot_tables());
    let details = json!({
        "source_points": source.len(),
        "target_points": original.len(),
        "total_cost_reduced": plan.total_cost,
        "collision_margin": stay.sigma_observed,
        "sigma_lower_bound": stay.sigma_lower_bound,
        "original_monotone_margin": monotone.worst_margin,
        "reduced_cost_agreement": agreement,
        "curvature": mtw_summary(&scan),
    });
    Ok(Outcome { checks, details, tables, files: plan_files(&plan, &p)? })
}
