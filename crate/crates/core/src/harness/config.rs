use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::report::ReportFormat;
use super::Suite;
use crate::error::{Error, Result};
use crate::family::StateSpec;
use crate::grid::GridSpec;
use crate::stats::CompliancePolicy;

pub const SCHEMA_VERSION: u32 = 1;

/// Default thresholds, keyed by check id.
pub const DEFAULT_TOLERANCES: &[(&str, f64)] = &[
    ("eq5_time_norm", 1e-10),
    ("eq9_x_absp", 1e-6),
    ("eq9_convergence", 1.0),
    ("component_commutator", 4e-6),
    ("sum_commutator", 1e-6),
    ("schwarz_chain", 0.0),
    ("uncertainty_product", 1e-8),
    ("imaginary_leak", 1e-8),
    ("product_t_invariance", 1e-9),
    ("velocity_closed_form", 1e-6),
    ("energy_monotone", 0.01),
    ("energy_slope", 0.15),
    ("energy_expectation", 0.01),
    ("symbolic_exact", 0.0),
    ("dsl_round_trip", 0.0),
    ("dsl_lowering", 0.0),
    ("dsl_symbolic_numeric", 1e-8),
];

fn default_mass() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AsymptoticsConfig {
    pub state: StateSpec,
    pub t_values: Vec<f64>,
    /// Grid for the scan; the run grid when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
}

impl Default for AsymptoticsConfig {
    fn default() -> Self {
        AsymptoticsConfig {
            state: StateSpec::gaussian([3.0, 0.0, 0.0], 0.5),
            t_values: vec![4.0, 8.0, 16.0, 32.0, 64.0],
            grid: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DslConfig {
    pub seed: u64,
    pub round_trip_cases: usize,
    pub round_trip_depth: usize,
    pub numeric_cases: usize,
    pub numeric_depth: usize,
    /// Upper bound on terms in the normal form of a numeric case.
    pub numeric_max_terms: usize,
    pub grid: GridSpec,
    pub state: StateSpec,
    pub t: f64,
}

impl Default for DslConfig {
    fn default() -> Self {
        DslConfig {
            seed: 7,
            round_trip_cases: 500,
            round_trip_depth: 5,
            numeric_cases: 50,
            numeric_depth: 4,
            numeric_max_terms: 8,
            grid: GridSpec { n: 64, box_length: 32.0, hbar: 1.0 },
            state: StateSpec::gaussian([3.0, 0.0, 0.0], 0.5),
            t: 1.5,
        }
    }
}

/// Everything a verification run needs, read from a versioned JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: u32,
    pub grid: GridSpec,
    pub states: Vec<StateSpec>,
    pub t_values: Vec<f64>,
    #[serde(default = "default_mass")]
    pub mass: f64,
    /// Additional ħ values at which the uncertainty suite is repeated. The box
    /// is rescaled so that the momentum lattice stays the same.
    #[serde(default)]
    pub extra_hbar: Vec<f64>,
    /// Compare the x/|p| commutator residual against a grid with half the
    /// points and half the box.
    #[serde(default = "default_true")]
    pub convergence_check: bool,
    #[serde(default)]
    pub compliance: CompliancePolicy,
    /// Overrides of [`DEFAULT_TOLERANCES`].
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub asymptotics: AsymptoticsConfig,
    #[serde(default)]
    pub dsl: DslConfig,
    /// Suites run when the command line does not name one.
    #[serde(default = "default_suites")]
    pub suites: Vec<Suite>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub path: PathBuf,
    #[serde(default)]
    pub format: ReportFormat,
}

fn default_suites() -> Vec<Suite> {
    vec![Suite::All]
}

fn default_true() -> bool {
    true
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<RunConfig> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        RunConfig::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA_VERSION {
            return Err(Error::Config(format!("unsupported schema {} (expected {SCHEMA_VERSION})", self.schema)));
        }
        self.grid.validate().map_err(|e| Error::Config(e.to_string()))?;
        if self.states.is_empty() {
            return Err(Error::Config("no states configured".into()));
        }
        if self.t_values.is_empty() {
            return Err(Error::Config("no t values configured".into()));
        }
        if self.t_values.iter().any(|&t| t == 0.0 || !t.is_finite()) {
            return Err(Error::Config("time parameter must be nonzero".into()));
        }
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(Error::Config(format!("mass must be positive, got {}", self.mass)));
        }
        if self.extra_hbar.iter().any(|&h| !(h > 0.0 && h.is_finite())) {
            return Err(Error::Config("extra_hbar entries must be positive".into()));
        }
        if !(self.compliance.p_min >= 0.0 && self.compliance.tol > 0.0) {
            return Err(Error::Config("compliance needs p_min >= 0 and tol > 0".into()));
        }
        for (key, value) in &self.tolerances {
            if !DEFAULT_TOLERANCES.iter().any(|(k, _)| k == key) {
                return Err(Error::Config(format!("unknown tolerance key '{key}'")));
            }
            if !(value.is_finite() && *value >= 0.0) {
                return Err(Error::Config(format!("tolerance '{key}' must be finite and nonnegative")));
            }
        }
        if self.asymptotics.t_values.is_empty() {
            return Err(Error::Config("asymptotics needs at least one t value".into()));
        }
        if let Some(g) = &self.asymptotics.grid {
            g.validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        if self.suites.is_empty() {
            return Err(Error::Config("no suites configured".into()));
        }
        self.dsl.grid.validate().map_err(|e| Error::Config(e.to_string()))?;
        if self.dsl.t == 0.0 {
            return Err(Error::Config("time parameter must be nonzero".into()));
        }
        Ok(())
    }

    /// The threshold for a check id, falling back to [`DEFAULT_TOLERANCES`].
    pub fn tolerance(&self, key: &str) -> f64 {
        self.tolerances
            .get(key)
            .copied()
            .or_else(|| DEFAULT_TOLERANCES.iter().find(|(k, _)| *k == key).map(|(_, v)| *v))
            .unwrap_or(0.0)
    }
}
