//! Run configuration: a flat JSON object with exactly these keys.
//!
//! Unknown keys are a hard error so a typo in an exponent name cannot
//! silently fall back to a default. The effective configuration (after
//! command-line overrides) is serialized verbatim into every output file.

use serde::{Deserialize, Serialize};

use fracspec::lattice::BoxDomain;
use fracspec::potential::PotentialSpec;
use fracspec::resonance::{derive_params, ParamOptions, ResonanceParams};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Box side lengths `a_1..a_d`.
    pub sides: Vec<f64>,
    /// Fractional order, `1/2 < ell < 1` (`ell = 1` needs `allow_classical`).
    pub ell: f64,
    /// Large spectral scale `r > 1`.
    pub r: f64,
    /// Iteration depth budget `p >= 1`.
    pub p: i64,
    /// Depth of the predictor recursion, `1 <= kmax <= p1`.
    pub kmax: i64,
    /// Path of the potential file; omit for the zero potential.
    #[serde(default)]
    pub potential: Option<String>,
    /// Galerkin basis cutoff.
    pub cutoff: f64,
    /// Replaces the literal exponent alpha(ell) everywhere (visualization).
    #[serde(default)]
    pub override_alpha: Option<f64>,
    /// Pins the classification threshold directly.
    #[serde(default)]
    pub threshold_override: Option<f64>,
    /// Seed of the counter-based sample streams.
    pub seed: u64,
    /// Monte Carlo sample count (>= 1000).
    pub samples: u64,
    /// Output directory.
    pub out_dir: String,
    /// Multiplies the absolute tolerances of the verification suite.
    #[serde(default)]
    pub tolerance_scale: Option<f64>,
    /// Admits ell = 1 as the classical cross-check.
    #[serde(default)]
    pub allow_classical: Option<bool>,
}

#[derive(Debug)]
pub enum ConfigError {
    Io(std::io::Error),
    Parse(serde_json::Error),
    Invalid(String),
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConfigError::Io(e) => write!(f, "cannot read config: {e}"),
            ConfigError::Parse(e) => write!(f, "cannot parse config: {e}"),
            ConfigError::Invalid(m) => write!(f, "invalid config: {m}"),
        }
    }
}

impl RunConfig {
    pub fn load(path: &str) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(ConfigError::Io)?;
        serde_json::from_str(&text).map_err(ConfigError::Parse)
    }

    /// Validates every module precondition before any computation starts.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.sides.len() < 2 {
            return Err(ConfigError::Invalid("need at least two sides".into()));
        }
        if self.sides.iter().any(|&a| !(a > 0.0)) {
            return Err(ConfigError::Invalid("sides must be positive".into()));
        }
        let classical = self.allow_classical.unwrap_or(false);
        let order_ok = (self.ell > 0.5 && self.ell < 1.0) || (classical && self.ell == 1.0);
        if !order_ok {
            return Err(ConfigError::Invalid(format!(
                "ell = {} outside (1/2, 1)",
                self.ell
            )));
        }
        if !(self.r > 1.0) {
            return Err(ConfigError::Invalid(format!(
                "r = {} must exceed 1",
                self.r
            )));
        }
        if self.p < 1 {
            return Err(ConfigError::Invalid(format!("p = {} must be >= 1", self.p)));
        }
        let p1 = (self.p + 1) / 3;
        if self.kmax < 1 || self.kmax > p1.max(1) {
            return Err(ConfigError::Invalid(format!(
                "kmax = {} outside 1..={} (p1 of p = {})",
                self.kmax,
                p1.max(1),
                self.p
            )));
        }
        if !(self.cutoff > 0.0) {
            return Err(ConfigError::Invalid("cutoff must be positive".into()));
        }
        if self.samples < 1000 {
            return Err(ConfigError::Invalid("samples must be >= 1000".into()));
        }
        if let Some(s) = self.tolerance_scale {
            if s < 0.0 {
                return Err(ConfigError::Invalid("tolerance_scale must be >= 0".into()));
            }
        }
        Ok(())
    }

    pub fn domain(&self) -> Result<BoxDomain, ConfigError> {
        BoxDomain::new(self.sides.clone()).map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn params(&self) -> Result<ResonanceParams, ConfigError> {
        let opts = ParamOptions {
            exponent_override: self.override_alpha,
            threshold_override: self.threshold_override,
            allow_classical: self.allow_classical.unwrap_or(false),
        };
        derive_params(self.r, self.p, self.ell, self.sides.len(), &opts)
            .map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    /// Loads the potential file, or the zero potential when none is set.
    pub fn load_potential(&self) -> Result<PotentialSpec, ConfigError> {
        match &self.potential {
            None => Ok(PotentialSpec::zero(0)),
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(ConfigError::Io)?;
                PotentialSpec::parse_text(&text, self.sides.len())
                    .map_err(|e| ConfigError::Invalid(e.to_string()))
            }
        }
    }

    pub fn override_active(&self) -> bool {
        self.override_alpha.is_some() || self.threshold_override.is_some()
    }
}
