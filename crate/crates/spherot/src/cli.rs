//! Command line flags and their merge with a configuration file.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::Parser;

use crate::config::{Command, ExperimentConfig};
use crate::error::{AppError, Result};

#[derive(Debug, Parser)]
#[command(
    name = "spherot",
    version,
    about = "Optimal transport on the round sphere: curvature certification, solvers and regularity diagnostics",
    after_help = "Tolerance overrides take the form --tol.NAME VALUE (or --tol NAME=VALUE). \
                  Flags override the values of a --config file."
)]
pub struct Cli {
    /// Pipeline to run; may be omitted when the config file names it.
    #[arg(value_enum)]
    pub command: Option<Command>,
    /// JSON experiment configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// `quadratic`, `antenna`, or a tabulated profile file.
    #[arg(long)]
    pub profile: Option<String>,
    /// Ambient dimension n of the sphere S^{n-1}.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Margin from the cut locus.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Monte-Carlo sample count.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Evaluation grid size.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Support size of synthetic measures.
    #[arg(long)]
    pub points: Option<usize>,
    /// Random configurations for contact-verify.
    #[arg(long)]
    pub configurations: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Entropic regularisation for solve; the exact solver is used without it.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Source point cloud.
    #[arg(long)]
    pub source: Option<PathBuf>,
    /// Target point cloud.
    #[arg(long)]
    pub target: Option<PathBuf>,
    /// Potential JSON for transform-check.
    #[arg(long)]
    pub potential: Option<PathBuf>,
    /// Tolerance override.
    #[arg(long = "tol", value_name = "NAME=VALUE", value_parser = parse_tolerance)]
    pub tol: Vec<(String, f64)>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    pub threads: Option<usize>,
}

fn parse_tolerance(s: &str) -> std::result::Result<(String, f64), String> {
    let (name, value) = s.split_once('=').ok_or_else(|| format!("expected NAME=VALUE, got '{s}'"))?;
    let value = value.parse::<f64>().map_err(|e| format!("tolerance '{name}': {e}"))?;
    Ok((name.to_string(), value))
}

/// Rewrites `--tol.NAME VALUE` and `--tol.NAME=VALUE` into `--tol NAME=VALUE`.
pub fn normalize_args<I: IntoIterator<Item = OsString>>(args: I) -> Vec<OsString> {
    let mut out = Vec::new();
    let mut iter = args.into_iter();
    while let Some(arg) = iter.next() {
        match arg.to_str().and_then(|s| s.strip_prefix("--tol.")) {
            Some(rest) => {
                let pair = match rest.split_once('=') {
                    Some((name, value)) => format!("{name}={value}"),
                    None => format!("{rest}={}", iter.next().map(|v| v.to_string_lossy().into_owned()).unwrap_or_default()),
                };
                out.push("--tol".into());
                out.push(pair.into());
            }
            None => out.push(arg),
        }
    }
    out
}

impl Cli {
    pub fn parse_args<I: IntoIterator<Item = OsString>>(args: I) -> std::result::Result<Self, clap::Error> {
        Self::try_parse_from(normalize_args(args))
    }

    /// Config file values overridden by flags.
    pub fn into_config(self) -> Result<ExperimentConfig> {
        let mut config = match (&self.config, self.command) {
            (Some(path), _) => ExperimentConfig::from_file(path)?,
            (None, Some(command)) => ExperimentConfig::new(command),
            (None, None) => return Err(AppError::InvalidArgument("a command or --config is required".into())),
        };
        if let Some(c) = self.command {
            config.command = c;
        }
        if let Some(v) = self.profile {
            config.profile = v;
        }
        if let Some(v) = self.dim {
            config.dim = v;
        }
        if let Some(v) = self.sigma {
            config.sigma = v;
        }
        if let Some(v) = self.seed {
            config.seed = v;
        }
        if let Some(v) = self.out {
            config.out = v;
        }
        config.samples = self.samples.or(config.samples);
        config.grid = self.grid.or(config.grid);
        config.points = self.points.or(config.points);
        config.configurations = self.configurations.or(config.configurations);
        config.epsilon = self.epsilon.or(config.epsilon);
        config.source = self.source.or(config.source);
        config.target = self.target.or(config.target);
        config.potential = self.potential.or(config.potential);
        config.threads = self.threads.or(config.threads);
        config.tolerances.extend(self.tol);
        config.validate().map_err(|(key, msg)| AppError::InvalidArgument(format!("--{key}: {msg}")))?;
        Ok(config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(list: &[&str]) -> Vec<OsString> {
        list.iter().map(OsString::from).collect()
    }

    #[test]
    fn dotted_tolerances_are_rewritten() {
        let out = normalize_args(args(&["spherot", "--tol.marginal", "1e-6", "--tol.grid_min=2e-6", "--seed", "3"]));
        assert_eq!(out, args(&["spherot", "--tol", "marginal=1e-6", "--tol", "grid_min=2e-6", "--seed", "3"]));
    }

    #[test]
    fn flags_build_a_config() {
        let cli = Cli::parse_args(args(&["spherot", "mtw-scan", "--profile", "antenna", "--sigma", "0.05", "--tol.marginal", "1e-6"])).unwrap();
        let c = cli.into_config().unwrap();
        assert_eq!(c.command, Command::MtwScan);
        assert_eq!(c.profile, "antenna");
        assert_eq!(c.sigma, 0.05);
        assert_eq!(c.tolerances.get("marginal"), Some(&1e-6));
    }

    #[test]
    fn invalid_flags_are_rejected() {
        let cli = Cli::parse_args(args(&["spherot", "solve", "--dim", "2"])).unwrap();
        assert!(matches!(cli.into_config(), Err(AppError::InvalidArgument(_))));
        let cli = Cli::parse_args(args(&["spherot", "solve", "--tol.bogus", "1"])).unwrap();
        assert!(cli.into_config().is_err());
        assert!(Cli::parse_args(args(&["spherot"])).unwrap().into_config().is_err());
        assert!(Cli::parse_args(args(&["spherot", "--tol", "marginal"])).is_err());
    }
}
