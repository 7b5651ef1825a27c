//! Run configuration: built-in defaults, an optional TOML file, the
//! `QUANTIMETRIC_CAP` environment variable and command-line flags, in
//! increasing precedence.

use std::path::Path;

use quantimetric::flift::SolverLimits;
use quantimetric::QuantaleId;
use serde::Deserialize;

use crate::error::{CliError, Result};

pub const DEFAULT_CAP: usize = 1_000_000;

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub quantale: Option<QuantaleId>,
    pub c: Option<f64>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub upto: Option<Vec<String>>,
    pub cap: Option<usize>,
    #[serde(default)]
    pub transport: TransportSection,
    #[serde(default)]
    pub coupling: CouplingSection,
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransportSection {
    pub max_pivots: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingSection {
    pub max_enum: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        toml::from_str(&text).map_err(|source| CliError::Toml {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Flag values as given on the command line (or via the environment).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub quantale: Option<QuantaleId>,
    pub c: Option<f64>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub upto: Option<Vec<String>>,
    pub cap: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub quantale: QuantaleId,
    /// Discount of the machine lifting, in `(0, 1)`.
    pub c: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Up-to techniques, applied in list order.
    pub upto: Vec<String>,
    pub cap: usize,
    pub limits: SolverLimits,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            quantale: QuantaleId::UnitIntervalRev,
            c: 0.5,
            tol: 1e-9,
            max_iter: 100_000,
            upto: Vec::new(),
            cap: DEFAULT_CAP,
            limits: SolverLimits::default(),
        }
    }
}

impl RunConfig {
    pub fn resolve(file: Option<&FileConfig>, flags: &Overrides) -> Result<Self> {
        let base = RunConfig::default();
        let empty = FileConfig::default();
        let file = file.unwrap_or(&empty);
        let cfg = RunConfig {
            quantale: flags.quantale.or(file.quantale).unwrap_or(base.quantale),
            c: flags.c.or(file.c).unwrap_or(base.c),
            tol: flags.tol.or(file.tol).unwrap_or(base.tol),
            max_iter: flags.max_iter.or(file.max_iter).unwrap_or(base.max_iter),
            upto: flags
                .upto
                .clone()
                .or_else(|| file.upto.clone())
                .unwrap_or(base.upto),
            cap: flags.cap.or(file.cap).unwrap_or(base.cap),
            limits: SolverLimits {
                transport_max_pivots: file
                    .transport
                    .max_pivots
                    .unwrap_or(base.limits.transport_max_pivots),
                coupling_max_enum: file
                    .coupling
                    .max_enum
                    .unwrap_or(base.limits.coupling_max_enum),
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c < 1.0) {
            return Err(CliError::Usage(format!("--c must lie in (0,1), got {}", self.c)));
        }
        if !(self.tol > 0.0) {
            return Err(CliError::Usage(format!("--tol must be positive, got {}", self.tol)));
        }
        if self.cap == 0 {
            return Err(CliError::Usage("--cap must be positive".into()));
        }
        Ok(())
    }
}

/// Splits a comma-separated technique list; the empty string is no
/// technique.
pub fn parse_upto(s: &str) -> Vec<String> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(String::from)
        .collect()
}
