//! Experiment configuration: JSON schema, defaults, validation and the
//! profile resolver.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use spherot_core::{CostProfile, Tolerances};

use crate::error::{AppError, Result};
use crate::formats;

/// Pipelines the runner can execute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Seeded certification of the positive cost-sectional curvature.
    MtwScan,
    /// Grid infima of the scalar inequalities behind the positivity proof.
    Inequalities,
    /// Discrete transport between two point clouds.
    Solve,
    /// Regularity diagnostics on a family of increasingly concentrated sources.
    Diagnose,
    /// Contact sets of random two-support potentials at their ridge.
    ContactVerify,
    /// Double c-transform of a potential on a grid.
    TransformCheck,
    /// Reflector-antenna transport in its original variables.
    Antenna,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::MtwScan => "mtw-scan",
            Command::Inequalities => "inequalities",
            Command::Solve => "solve",
            Command::Diagnose => "diagnose",
            Command::ContactVerify => "contact-verify",
            Command::TransformCheck => "transform-check",
            Command::Antenna => "antenna",
        }
    }
}

/// A full experiment description. Optional sizes fall back to per-command
/// defaults in [`ExperimentConfig::resolve`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Command,
    /// `quadratic`, `antenna`, or a path to a tabulated profile file.
    #[serde(default = "default_profile")]
    pub profile: String,
    /// Ambient dimension `n` of the sphere `S^{n-1}`.
    #[serde(default = "default_dim")]
    pub dim: usize,
    /// Evaluation grid size (points on the sphere, or 1-d grid for `inequalities`).
    #[serde(default)]
    pub grid: Option<usize>,
    /// Support size of synthetic measures.
    #[serde(default)]
    pub points: Option<usize>,
    /// Monte-Carlo sample count.
    #[serde(default)]
    pub samples: Option<usize>,
    /// Random configurations for `contact-verify`.
    #[serde(default)]
    pub configurations: Option<usize>,
    /// Margin σ from the cut locus.
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default)]
    pub seed: u64,
    /// Entropic regularisation; absent means the exact solver.
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub source: Option<PathBuf>,
    #[serde(default)]
    pub target: Option<PathBuf>,
    #[serde(default)]
    pub potential: Option<PathBuf>,
    /// Overrides of the default tolerance table, by name.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    /// Worker threads; absent means the available parallelism.
    #[serde(default)]
    pub threads: Option<usize>,
}

fn default_profile() -> String {
    "quadratic".into()
}

fn default_dim() -> usize {
    3
}

fn default_sigma() -> f64 {
    0.1
}

fn default_out() -> PathBuf {
    PathBuf::from("spherot-out")
}

/// Largest accepted ambient dimension.
pub const MAX_DIM: usize = 16;

impl ExperimentConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            profile: default_profile(),
            dim: default_dim(),
            grid: None,
            points: None,
            samples: None,
            configurations: None,
            sigma: default_sigma(),
            seed: 0,
            epsilon: None,
            source: None,
            target: None,
            potential: None,
            tolerances: BTreeMap::new(),
            out: default_out(),
            threads: None,
        }
    }

    /// Parses a JSON configuration; `origin` names the source in errors.
    pub fn from_json(text: &str, origin: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text)
            .map_err(|e| AppError::Config { origin: origin.into(), line: e.line(), column: e.column(), message: strip_position(e.to_string()) })?;
        config.validate().map_err(|(key, message)| {
            let (line, column) = locate_key(text, key);
            AppError::Config { origin: origin.into(), line, column, message }
        })?;
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
        Self::from_json(&text, &path.display().to_string())
    }

    /// Fills the optional sizes used by the command with its defaults.
    pub fn resolve(mut self) -> Self {
        let (grid, points, samples, configurations) = match self.command {
            Command::MtwScan => (None, None, Some(10_000), None),
            Command::Inequalities => (Some(100_000), None, None, None),
            Command::Solve => (None, Some(100), None, None),
            Command::Diagnose => (Some(20_000), Some(150), Some(250_000), None),
            Command::ContactVerify => (Some(20_000), None, None, Some(20)),
            Command::TransformCheck => (Some(6_000), None, None, None),
            Command::Antenna => (None, Some(100), Some(10_000), None),
        };
        self.grid = self.grid.or(grid);
        self.points = self.points.or(points);
        self.samples = self.samples.or(samples);
        self.configurations = self.configurations.or(configurations);
        self
    }

    /// Checks value ranges; the error names the offending key.
    pub fn validate(&self) -> std::result::Result<(), (&'static str, String)> {
        if !(3..=MAX_DIM).contains(&self.dim) {
            return Err(("dim", format!("dim must lie in 3..={MAX_DIM}, got {}", self.dim)));
        }
        if !(self.sigma > 0.0 && self.sigma < std::f64::consts::PI) {
            return Err(("sigma", format!("sigma must lie in (0, pi), got {}", self.sigma)));
        }
        for (key, value, least) in
            [("grid", self.grid, 2), ("points", self.points, 2), ("samples", self.samples, 1), ("configurations", self.configurations, 1)]
        {
            if let Some(v) = value {
                if v < least {
                    return Err((key, format!("{key} must be at least {least}, got {v}")));
                }
            }
        }
        if let Some(eps) = self.epsilon {
            if !(eps > 0.0 && eps.is_finite()) {
                return Err(("epsilon", format!("epsilon must be positive, got {eps}")));
            }
        }
        if self.threads == Some(0) {
            return Err(("threads", "threads must be at least 1".into()));
        }
        if self.profile.is_empty() {
            return Err(("profile", "profile must not be empty".into()));
        }
        self.tolerance_table().map_err(|m| ("tolerances", m))?;
        Ok(())
    }

    /// Default tolerance table with the configured overrides applied.
    pub fn tolerance_table(&self) -> std::result::Result<Tolerances, String> {
        let mut table = Tolerances::default();
        for (name, &value) in &self.tolerances {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(format!("tolerance '{name}' must be finite and nonnegative, got {value}"));
            }
            table.set(name, value).map_err(|_| format!("unknown tolerance '{name}'; known: {}", Tolerances::NAMES.join(", ")))?;
        }
        Ok(table)
    }

    /// The cost profile: a built-in name or a tabulated profile file.
    pub fn cost_profile(&self) -> Result<CostProfile> {
        if let Some(p) = CostProfile::by_name(&self.profile) {
            return Ok(p);
        }
        let path = Path::new(&self.profile);
        if !path.exists() {
            return Err(AppError::InvalidArgument(format!(
                "profile '{}' is neither a built-in name (quadratic, antenna) nor an existing file",
                self.profile
            )));
        }
        formats::read_tabulated_profile(path)
    }
}

/// Drops serde_json's trailing position, which the error reports separately.
fn strip_position(mut message: String) -> String {
    if let Some(at) = message.rfind(" at line ") {
        message.truncate(at);
    }
    message
}

/// 1-based line and column of the first occurrence of `"key"` in `text`,
/// or the start of the document.
fn locate_key(text: &str, key: &str) -> (usize, usize) {
    let needle = format!("\"{key}\"");
    text.lines()
        .enumerate()
        .find_map(|(i, line)| line.find(&needle).map(|c| (i + 1, c + 1)))
        .unwrap_or((1, 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_per_command_sizes() {
        let c = ExperimentConfig::from_json(r#"{"command": "mtw-scan"}"#, "t").unwrap().resolve();
        assert_eq!(c.samples, Some(10_000));
        assert_eq!(c.dim, 3);
        assert_eq!(c.profile, "quadratic");
    }

    #[test]
    fn syntax_errors_carry_line_and_column() {
        let err = ExperimentConfig::from_json("{\n  \"command\": \"solve\",\n  \"dim\": ,\n}", "cfg.json").unwrap_err();
        match err {
            AppError::Config { line, .. } => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_keys_and_bad_values_are_rejected() {
        assert!(ExperimentConfig::from_json(r#"{"command": "solve", "colour": 1}"#, "t").is_err());
        let err = ExperimentConfig::from_json("{\n\"command\": \"solve\",\n\"sigma\": -1\n}", "t").unwrap_err();
        assert!(matches!(err, AppError::Config { line: 3, .. }), "{err}");
        let err = ExperimentConfig::from_json("{\"command\": \"solve\",\n \"tolerances\": {\"nope\": 1}}", "t").unwrap_err();
        assert!(matches!(err, AppError::Config { line: 2, .. }), "{err}");
    }
}
