//! Run parameters: command-line flags override the TOML file, which
//! overrides the built-in defaults.

use std::path::Path;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
    Table,
}

/// Every tunable parameter. All fields are optional here so that flags and
/// file entries can be layered; [`RunConfig`] holds the resolved values.
#[derive(Clone, Debug, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    /// Must match the invoked verb when set in a config file.
    #[arg(skip)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    /// Curve as `p=5 f=1 a4=1 a6=0`, or by trace as `p=5 f=2 a=3`.
    #[arg(long, global = true)]
    pub curve: Option<String>,
    /// Test function as `bump:c=1.6094,w=0.5[,a=1]` (`bump`, `gaussian`, `hat`).
    #[arg(long, global = true)]
    pub alpha: Option<String>,
    /// Spectral truncation `|nu| <= nu_max`.
    #[arg(long, global = true)]
    pub nu_max: Option<u32>,
    /// Genus plugged into the Euler term `(2 - 2g) alpha(0) log q`.
    #[arg(long, global = true)]
    pub genus: Option<u32>,
    /// Census depth; defaults to what the test function's support needs.
    #[arg(long, global = true)]
    pub max_degree: Option<u32>,
    /// Prime of the p-adic model
    #[arg(long, global = true)]
    pub p: Option<u64>,
    /// Precision: work modulo `p^n`
    #[arg(long, global = true)]
    pub n: Option<u32>,
    /// Rank of `(Z/p^n)^m`
    #[arg(long, global = true)]
    pub m: Option<usize>,
    /// Comma separated check names, or `all`.
    #[arg(long, global = true)]
    pub check: Option<String>,
    /// Random samples per randomized check.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// `gaussian`, `eisenstein`, `companion:a=1,q=5` or `curve` (from `--curve`).
    #[arg(long, global = true)]
    pub lattice: Option<String>,
    /// Quotient depth for lattice checks.
    #[arg(long, global = true)]
    pub depth: Option<u32>,
    /// Orbit iterate.
    #[arg(long, global = true)]
    pub k: Option<u32>,
    /// `+` (forward) or `-` (backward).
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub direction: Option<String>,
    /// Output format
    #[arg(long, global = true)]
    pub format: Option<Format>,
    /// Seed for randomized checks
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// `csv`: print the partial-sum series `nu,partial_sum` instead of the report.
    #[arg(long, global = true)]
    pub emit_plot: Option<String>,
    /// Relative tolerance of the adaptive quadrature
    #[arg(long, global = true)]
    pub quadrature_tol: Option<f64>,
    /// Slack added to the tail bound when judging a residual
    #[arg(long, global = true)]
    pub formula_tol: Option<f64>,
    /// Multiplier on the truncation envelope
    #[arg(long, global = true)]
    pub safety: Option<f64>,
    /// `conductor` or `literal`.
    #[arg(long, global = true)]
    pub norm: Option<String>,
}

macro_rules! layer {
    ($hi:expr, $lo:expr, $($f:ident),*) => {
        Params { $($f: $hi.$f.or($lo.$f),)* }
    };
}

impl Params {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// `self` wins wherever it is set.
    pub fn over(self, lower: Params) -> Params {
        layer!(
            self, lower, command, curve, alpha, nu_max, genus, max_degree, p, n, m, check,
            samples, lattice, depth, k, direction, format, seed, emit_plot, quadrature_tol,
            formula_tol, safety, norm
        )
    }
}

/// Resolved parameters, printed by `--explain`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub curve: Option<String>,
    pub alpha: Option<String>,
    pub nu_max: u32,
    pub genus: Option<u32>,
    pub max_degree: Option<u32>,
    pub p: u64,
    pub n: u32,
    pub m: usize,
    pub check: String,
    pub samples: usize,
    /// `None` means the curve's lattice when `--curve` is given, else `gaussian`.
    pub lattice: Option<String>,
    pub depth: u32,
    pub k: u32,
    pub direction: String,
    pub format: Format,
    pub seed: u64,
    pub emit_plot: Option<String>,
    pub quadrature_tol: f64,
    pub formula_tol: f64,
    pub safety: f64,
    pub norm: String,
}

pub const NU_MAX_LIMIT: u32 = 1 << 16;

fn check_range<T: PartialOrd + std::fmt::Display>(name: &str, v: T, lo: T, hi: T) -> Result<T, CliError> {
    if v < lo || v > hi {
        return Err(CliError::Config(format!("{name} = {v} outside [{lo}, {hi}]")));
    }
    Ok(v)
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if !(v.is_finite() && v > 0.0) {
        return Err(CliError::Config(format!("{name} must be positive and finite, got {v}")));
    }
    Ok(v)
}

impl RunConfig {
    pub fn resolve(command: &str, params: Params) -> Result<Self, CliError> {
        if let Some(c) = &params.command {
            if c != command {
                return Err(CliError::Config(format!(
                    "config file is for `{c}`, invoked `{command}`"
                )));
            }
        }
        let cfg = RunConfig {
            command: command.to_string(),
            curve: params.curve,
            alpha: params.alpha,
            nu_max: check_range("nu_max", params.nu_max.unwrap_or(256), 1, NU_MAX_LIMIT)?,
            genus: params.genus.map(|g| check_range("genus", g, 0, 1000)).transpose()?,
            max_degree: params.max_degree.map(|d| check_range("max_degree", d, 1, 256)).transpose()?,
            p: params.p.unwrap_or(2),
            n: check_range("n", params.n.unwrap_or(2), 1, 40)?,
            m: check_range("m", params.m.unwrap_or(2), 1, 8)?,
            check: params.check.unwrap_or_else(|| "all".into()),
            samples: check_range("samples", params.samples.unwrap_or(50), 1, 100_000)?,
            lattice: params.lattice,
            depth: check_range("depth", params.depth.unwrap_or(4), 1, 12)?,
            k: check_range("k", params.k.unwrap_or(1), 1, 16)?,
            direction: params.direction.unwrap_or_else(|| "-".into()),
            format: params.format.unwrap_or_default(),
            seed: params.seed.unwrap_or(0),
            emit_plot: params.emit_plot,
            quadrature_tol: positive("quadrature_tol", params.quadrature_tol.unwrap_or(1e-12))?,
            formula_tol: positive("formula_tol", params.formula_tol.unwrap_or(1e-8))?,
            safety: positive("safety", params.safety.unwrap_or(10.0))?,
            norm: params.norm.unwrap_or_else(|| "conductor".into()),
        };
        if let Some(plot) = &cfg.emit_plot {
            if plot != "csv" {
                return Err(CliError::Config(format!("emit_plot supports only `csv`, got `{plot}`")));
            }
        }
        if !matches!(cfg.norm.as_str(), "conductor" | "literal") {
            return Err(CliError::Config(format!("norm must be conductor or literal, got `{}`", cfg.norm)));
        }
        Ok(cfg)
    }
}
