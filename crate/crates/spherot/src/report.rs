//! Run reports, plot-ready tables and the experiment manifest.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use spherot_core::mtw::MtwReport;
use spherot_core::regularity::{GrowthConditionReport, StayAwayReport};
use spherot_core::Tolerances;

use crate::config::{Command, ExperimentConfig};
use crate::error::{AppError, Result};
use crate::formats::into_string;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = ">")]
    Greater,
    #[serde(rename = ">=")]
    AtLeast,
    #[serde(rename = "<")]
    Less,
    #[serde(rename = "<=")]
    AtMost,
}

/// One assertion of a run: `value relation threshold`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub relation: Relation,
    pub threshold: f64,
    pub passed: bool,
}

impl Check {
    /// A check that fails on NaN.
    pub fn new(name: impl Into<String>, value: f64, relation: Relation, threshold: f64) -> Self {
        let passed = match relation {
            Relation::Greater => value > threshold,
            Relation::AtLeast => value >= threshold,
            Relation::Less => value < threshold,
            Relation::AtMost => value <= threshold,
        };
        Self { name: name.into(), value, relation, threshold, passed }
    }

    /// A boolean outcome recorded as `1 >= 1` or `0 >= 1`.
    pub fn flag(name: impl Into<String>, ok: bool) -> Self {
        Self::new(name, if ok { 1.0 } else { 0.0 }, Relation::AtLeast, 1.0)
    }
}

/// Deterministic result of a run: no timestamps or host details.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub command: Command,
    pub profile: String,
    pub dim: usize,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub tolerances: BTreeMap<String, f64>,
    pub details: serde_json::Value,
}

impl Report {
    pub fn new(config: &ExperimentConfig, profile: &str, tolerances: &Tolerances, checks: Vec<Check>, details: serde_json::Value) -> Self {
        Self {
            command: config.command,
            profile: profile.into(),
            dim: config.dim,
            seed: config.seed,
            passed: checks.iter().all(|c| c.passed),
            checks,
            tolerances: tolerances.entries().into_iter().collect(),
            details,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

/// A tidy table: one observation per row, columns documented in `#`
/// comment lines above the header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub file: String,
    pub title: String,
    /// `(name, description)` per column.
    pub columns: Vec<(String, String)>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(file: impl Into<String>, title: impl Into<String>, columns: &[(&str, &str)]) -> Self {
        Self {
            file: file.into(),
            title: title.into(),
            columns: columns.iter().map(|(n, d)| (n.to_string(), d.to_string())).collect(),
            rows: Vec::new(),
        }
    }

    /// Appends a row of numbers.
    pub fn push(&mut self, values: &[f64]) {
        debug_assert_eq!(values.len(), self.columns.len());
        self.rows.push(values.iter().copied().map(format_number).collect());
    }

    pub fn push_text(&mut self, values: Vec<String>) {
        debug_assert_eq!(values.len(), self.columns.len());
        self.rows.push(values);
    }

    pub fn render(&self) -> Result<String> {
        let mut out = format!("# {}\n", self.title);
        for (name, doc) in &self.columns {
            out.push_str(&format!("# {name}: {doc}\n"));
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.columns.iter().map(|c| c.0.as_str()))?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        out.push_str(&into_string(w)?);
        Ok(out)
    }

    pub fn write_to(&self, dir: &Path) -> Result<()> {
        let path = dir.join(&self.file);
        std::fs::write(&path, self.render()?).map_err(|e| AppError::io(path, e))
    }
}

/// Shortest round-trip decimal, in exponent form for very small or large
/// magnitudes.
pub fn format_number(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e15).contains(&a) {
        format!("{v:e}")
    } else {
        v.to_string()
    }
}

/// Sources of plot-ready tables.
pub trait PlotData {
    fn plot_tables(&self) -> Vec<Table>;
}

impl PlotData for MtwReport {
    /// The `(r, value)` curve, sorted by distance.
    fn plot_tables(&self) -> Vec<Table> {
        let mut t = Table::new(
            "mtw_curve.csv",
            format!("cost-sectional curvature samples for profile {}", self.profile),
            &[("sample", "index of the seeded query"), ("r", "distance d(x, y)"), ("value", "curvature value at the query")],
        );
        let mut order: Vec<usize> = (0..self.rows.len()).collect();
        order.sort_by(|&a, &b| self.rows[a].r.total_cmp(&self.rows[b].r).then(a.cmp(&b)));
        for k in order {
            t.push(&[k as f64, self.rows[k].r, self.rows[k].value]);
        }
        vec![t]
    }
}

/// Stay-away reports indexed by the concentration parameter λ.
pub struct StayAwayFamily<'a>(pub &'a [(f64, StayAwayReport)]);

impl PlotData for StayAwayFamily<'_> {
    fn plot_tables(&self) -> Vec<Table> {
        let mut t = Table::new(
            "stay_away.csv",
            "stay-away margins over a family of sources",
            &[
                ("lambda", "concentration parameter of the source"),
                ("sigma", "observed margin from the cut locus"),
                ("sigma_lower_bound", "margin guaranteed by the mass construction"),
            ],
        );
        for (lambda, r) in self.0 {
            t.push(&[*lambda, r.sigma_observed, r.sigma_lower_bound]);
        }
        vec![t]
    }
}

/// Growth reports indexed by the concentration parameter λ.
pub struct GrowthFamily<'a>(pub &'a [(f64, GrowthConditionReport)]);

impl PlotData for GrowthFamily<'_> {
    fn plot_tables(&self) -> Vec<Table> {
        let mut t = Table::new(
            "growth.csv",
            "ball-mass growth ratios over a family of sources",
            &[
                ("lambda", "concentration parameter of the source"),
                ("radius", "ball radius"),
                ("sup_ratio", "largest ball mass divided by radius^exponent"),
            ],
        );
        for (lambda, r) in self.0 {
            for row in &r.rows {
                t.push(&[*lambda, row.radius, row.sup_ratio]);
            }
        }
        vec![t]
    }
}

/// Writes the plot tables of `report` into `dir`, returning the file names.
pub fn emit_plot_data(report: &dyn PlotData, dir: &Path) -> Result<Vec<String>> {
    report
        .plot_tables()
        .into_iter()
        .map(|t| {
            t.write_to(dir)?;
            Ok(t.file)
        })
        .collect()
}

/// Run metadata. Timestamps and thread counts live here only.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub config: ExperimentConfig,
    pub tolerances: BTreeMap<String, f64>,
    pub threads: usize,
    pub started_unix: f64,
    pub elapsed_seconds: f64,
    pub artifacts: Vec<String>,
    pub passed: bool,
    pub exit_status: i32,
}

#[cfg(test)]
mod tests {
    use super::*;
    use spherot_core::mtw::certify_as;
    use spherot_core::CostProfile;

    #[test]
    fn checks_fail_on_nan() {
        assert!(!Check::new("x", f64::NAN, Relation::AtLeast, 0.0).passed);
        assert!(Check::new("x", 0.0, Relation::AtLeast, 0.0).passed);
        assert!(!Check::new("x", 0.0, Relation::Greater, 0.0).passed);
        assert!(Check::flag("ok", true).passed);
    }

    #[test]
    fn empty_family_gives_header_only_csv() {
        let text = StayAwayFamily(&[]).plot_tables()[0].render().unwrap();
        let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(data, ["lambda,sigma,sigma_lower_bound"]);
    }

    #[test]
    fn mtw_curve_is_sorted_by_distance() {
        let report = certify_as(&CostProfile::Quadratic, 3, 0.1, 50, 1).unwrap();
        let table = &report.plot_tables()[0];
        assert_eq!(table.rows.len(), 50);
        let r: Vec<f64> = table.rows.iter().map(|row| row[1].parse().unwrap()).collect();
        assert!(r.windows(2).all(|w| w[0] <= w[1]));
        let text = table.render().unwrap();
        assert!(text.lines().take(4).all(|l| l.starts_with('#')));
    }
}
