//! Plain-text input and output formats.
//!
//! * Point clouds: one point per line, `n` whitespace-separated coordinates
//!   and an optional trailing weight; `#` starts a comment.
//! * Tabulated profiles: rows `d f f' f'' f''' f''''`, same comment rules.
//! * Potentials: JSON `{"profile": name, "supports": [{"y": [..], "a": ..}]}`.
//! * Plans: `i,j,mass` CSV triplets plus a JSON sidecar with the duals.

use std::path::Path;

use serde::{Deserialize, Serialize};
use spherot_core::cconvex::{CConvexPotential, Support};
use spherot_core::ot::{DiscreteMeasure, TransportPlan};
use spherot_core::{CostProfile, SpherePoint, TabulatedProfile};

use crate::error::{AppError, CoreContext, Result};

/// Largest deviation from unit norm accepted for input points.
pub const UNIT_NORM_SLACK: f64 = 1e-6;

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))
}

/// Non-empty, non-comment lines with their 1-based numbers, parsed as
/// decimals.
fn numeric_rows<'a>(text: &'a str, origin: &'a str) -> impl Iterator<Item = Result<(usize, Vec<f64>)>> + 'a {
    text.lines().enumerate().filter_map(move |(i, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            return None;
        }
        let parsed: std::result::Result<Vec<f64>, _> = line.split_whitespace().map(str::parse::<f64>).collect();
        Some(parsed.map(|v| (i + 1, v)).map_err(|e| AppError::parse(origin, i + 1, format!("not a decimal number: {e}"))))
    })
}

fn is_unit(v: &[f64]) -> bool {
    (v.iter().map(|x| x * x).sum::<f64>().sqrt() - 1.0).abs() <= UNIT_NORM_SLACK
}

/// Parses a point cloud. With `dim` given, rows must have `dim` or
/// `dim + 1` columns; without it, a row is read as a weighted point when
/// its leading columns have unit norm and the full row does not.
pub fn parse_point_cloud(text: &str, origin: &str, dim: Option<usize>) -> Result<DiscreteMeasure> {
    let mut points = Vec::new();
    let mut weights = Vec::new();
    let mut layout: Option<(usize, bool)> = None;
    for row in numeric_rows(text, origin) {
        let (line, values) = row?;
        let weighted = match (dim, layout) {
            (_, Some((n, w))) => {
                if values.len() != n + usize::from(w) {
                    return Err(AppError::parse(origin, line, format!("expected {} columns, found {}", n + usize::from(w), values.len())));
                }
                w
            }
            (Some(n), None) if values.len() == n => false,
            (Some(n), None) if values.len() == n + 1 => true,
            (Some(n), None) => return Err(AppError::parse(origin, line, format!("expected {n} or {} columns, found {}", n + 1, values.len()))),
            (None, None) => !is_unit(&values) && values.len() > 3 && is_unit(&values[..values.len() - 1]),
        };
        let n = values.len() - usize::from(weighted);
        layout.get_or_insert((n, weighted));
        let coords = values[..n].to_vec();
        if !is_unit(&coords) {
            return Err(AppError::parse(origin, line, "point is not on the unit sphere"));
        }
        let w = if weighted { values[n] } else { 1.0 };
        if !(w > 0.0 && w.is_finite()) {
            return Err(AppError::parse(origin, line, format!("weight {w} is not positive")));
        }
        points.push(SpherePoint::new(coords).map_err(|e| AppError::parse(origin, line, e.to_string()))?);
        weights.push(w);
    }
    if points.is_empty() {
        return Err(AppError::parse(origin, 1, "point cloud is empty"));
    }
    DiscreteMeasure::normalized(points, weights).context(|| format!("{origin}: building measure"))
}

pub fn read_point_cloud(path: &Path, dim: Option<usize>) -> Result<DiscreteMeasure> {
    parse_point_cloud(&read(path)?, &path.display().to_string(), dim)
}

/// Weighted point cloud in the format read by [`parse_point_cloud`].
pub fn write_point_cloud(measure: &DiscreteMeasure) -> String {
    let mut out = format!("# {} points in R^{}; columns: coordinates then weight\n", measure.len(), measure.dim());
    for (p, w) in measure.points().iter().zip(measure.weights()) {
        let row: Vec<String> = p.coords().iter().chain([w]).copied().map(crate::report::format_number).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// Parses a tabulated profile with rows `d f f' f'' f''' f''''`.
pub fn parse_tabulated_profile(text: &str, origin: &str, name: &str) -> Result<TabulatedProfile> {
    let mut knots = Vec::new();
    let mut columns: [Vec<f64>; 5] = Default::default();
    for row in numeric_rows(text, origin) {
        let (line, values) = row?;
        if values.len() != 6 {
            return Err(AppError::parse(origin, line, format!("expected 6 columns (d f f' f'' f''' f''''), found {}", values.len())));
        }
        knots.push(values[0]);
        for (column, v) in columns.iter_mut().zip(&values[1..]) {
            column.push(*v);
        }
    }
    TabulatedProfile::new(name, knots, columns).context(|| format!("{origin}: tabulated profile"))
}

pub fn read_tabulated_profile(path: &Path) -> Result<CostProfile> {
    let name = path.file_stem().map_or_else(|| "tabulated".into(), |s| s.to_string_lossy().into_owned());
    Ok(CostProfile::custom(parse_tabulated_profile(&read(path)?, &path.display().to_string(), &name)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SupportRecord {
    pub y: Vec<f64>,
    pub a: f64,
}

/// On-disk form of a finite-max c-convex potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialFile {
    pub profile: String,
    pub supports: Vec<SupportRecord>,
}

impl PotentialFile {
    pub fn from_potential(phi: &CConvexPotential) -> Self {
        Self {
            profile: phi.profile().name().into(),
            supports: phi.supports().iter().map(|s| SupportRecord { y: s.y.coords().to_vec(), a: s.a }).collect(),
        }
    }

    /// Builds the potential under `profile`, which must carry the file's
    /// profile name.
    pub fn into_potential(self, profile: &CostProfile, origin: &str) -> Result<CConvexPotential> {
        if profile.name() != self.profile {
            return Err(AppError::parse(origin, 1, format!("potential is for profile '{}', run uses '{}'", self.profile, profile.name())));
        }
        let supports = self
            .supports
            .into_iter()
            .enumerate()
            .map(|(k, s)| {
                if !is_unit(&s.y) {
                    return Err(AppError::parse(origin, 1, format!("support {k} is not on the unit sphere")));
                }
                Ok(Support::new(SpherePoint::new(s.y).context(|| format!("{origin}: support {k}"))?, s.a))
            })
            .collect::<Result<Vec<_>>>()?;
        CConvexPotential::new(profile.clone(), supports).context(|| format!("{origin}: potential"))
    }
}

pub fn read_potential(path: &Path, profile: &CostProfile) -> Result<CConvexPotential> {
    let origin = path.display().to_string();
    let file: PotentialFile = serde_json::from_str(&read(path)?).map_err(|e| AppError::parse(&origin, e.line(), e.to_string()))?;
    file.into_potential(profile, &origin)
}

/// `i,j,mass` rows of the positive plan entries.
pub fn plan_csv(plan: &TransportPlan) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["i", "j", "mass"])?;
    for e in &plan.entries {
        w.write_record([e.i.to_string(), e.j.to_string(), crate::report::format_number(e.mass)])?;
    }
    into_string(w)
}

/// Reads `i,j,mass` triplets.
pub fn parse_plan_csv(text: &str, origin: &str) -> Result<Vec<(usize, usize, f64)>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.records()
        .enumerate()
        .map(|(k, rec)| {
            let rec = rec?;
            let line = k + 2;
            let field = |i: usize| rec.get(i).ok_or_else(|| AppError::parse(origin, line, "missing column"));
            let bad = |e: &dyn std::fmt::Display| AppError::parse(origin, line, e.to_string());
            Ok((
                field(0)?.trim().parse().map_err(|e| bad(&e))?,
                field(1)?.trim().parse().map_err(|e| bad(&e))?,
                field(2)?.trim().parse().map_err(|e| bad(&e))?,
            ))
        })
        .collect()
}

/// Dual potentials and objective accompanying a plan CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanSidecar {
    pub profile: String,
    pub source_points: usize,
    pub target_points: usize,
    pub total_cost: f64,
    pub dual_phi: Vec<f64>,
    pub dual_phic: Vec<f64>,
    pub marginal_residual: f64,
    pub duality_gap: f64,
}

impl PlanSidecar {
    pub fn new(plan: &TransportPlan, profile: &CostProfile) -> Self {
        Self {
            profile: profile.name().into(),
            source_points: plan.source.len(),
            target_points: plan.target.len(),
            total_cost: plan.total_cost,
            dual_phi: plan.dual_phi.clone(),
            dual_phic: plan.dual_phic.clone(),
            marginal_residual: plan.marginal_residual(),
            duality_gap: plan.duality_gap(),
        }
    }
}

pub(crate) fn into_string(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| AppError::Output(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| AppError::Output(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_cloud_layouts() {
        let plain = "# comment\n1 0 0\n0 1 0 # trailing\n\n0 0 1\n";
        let m = parse_point_cloud(plain, "p", None).unwrap();
        assert_eq!(m.len(), 3);
        assert!(m.weights().iter().all(|w| (w - 1.0 / 3.0).abs() < 1e-15));
        let weighted = "1 0 0 3\n0 1 0 1\n";
        let m = parse_point_cloud(weighted, "w", None).unwrap();
        assert_eq!(m.weights(), &[0.75, 0.25]);
        let m = parse_point_cloud("1 0 0 0\n0 1 0 0\n", "4d", None).unwrap();
        assert_eq!(m.dim(), 4);
        let m = parse_point_cloud("1 0 0 2\n0 1 0 2\n", "hint", Some(3)).unwrap();
        assert_eq!(m.dim(), 3);
    }

    #[test]
    fn point_cloud_errors_name_the_line() {
        let err = parse_point_cloud("1 0 0\n0 2 0\n", "p", None).unwrap_err();
        assert!(matches!(err, AppError::Parse { line: 2, .. }), "{err}");
        let err = parse_point_cloud("1 0 0\n0 1\n", "p", None).unwrap_err();
        assert!(matches!(err, AppError::Parse { line: 2, .. }), "{err}");
        let err = parse_point_cloud("1 0 x\n", "p", None).unwrap_err();
        assert!(matches!(err, AppError::Parse { line: 1, .. }), "{err}");
        assert!(parse_point_cloud("# nothing\n", "p", None).is_err());
        assert!(parse_point_cloud("1 0 0 -1\n", "p", Some(3)).is_err());
    }

    #[test]
    fn point_cloud_round_trip() {
        let text = "0.6 0.8 0 2\n0 0 1 1\n";
        let m = parse_point_cloud(text, "p", None).unwrap();
        let back = parse_point_cloud(&write_point_cloud(&m), "q", Some(3)).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn tabulated_quadratic_profile() {
        let mut text = String::from("# d f f1 f2 f3 f4\n");
        for k in 0..=64 {
            let d = 3.0 * k as f64 / 64.0;
            text.push_str(&format!("{d} {} {d} 1 0 0\n", 0.5 * d * d));
        }
        let p = parse_tabulated_profile(&text, "t", "quad").unwrap();
        let c = CostProfile::custom(p);
        assert!((c.f(1.3) - 0.845).abs() < 1e-12);
        assert!(parse_tabulated_profile("0 0 0 1 0\n", "t", "q").is_err());
    }

    #[test]
    fn potential_round_trip() {
        let y = SpherePoint::basis(3, 2).unwrap();
        let phi = CConvexPotential::single(CostProfile::Quadratic, y, 0.25);
        let json = serde_json::to_string(&PotentialFile::from_potential(&phi)).unwrap();
        let file: PotentialFile = serde_json::from_str(&json).unwrap();
        let back = file.clone().into_potential(&CostProfile::Quadratic, "p").unwrap();
        assert_eq!(back.supports(), phi.supports());
        assert!(file.into_potential(&CostProfile::AntennaLog, "p").is_err());
    }

    #[test]
    fn plan_csv_round_trip() {
        let mu = DiscreteMeasure::uniform(spherot_core::sphere::fibonacci_grid(3, 5).unwrap()).unwrap();
        let plan = spherot_core::ot::solve_exact(&mu, &mu, &CostProfile::Quadratic).unwrap();
        let rows = parse_plan_csv(&plan_csv(&plan).unwrap(), "plan").unwrap();
        assert_eq!(rows.len(), plan.entries.len());
        for (r, e) in rows.iter().zip(&plan.entries) {
            assert_eq!(*r, (e.i, e.j, e.mass));
        }
    }
}
