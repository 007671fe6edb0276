//! JSON problem configuration.
//!
//! ```json
//! {
//!   "method": "drs",
//!   "alpha": 1.0,
//!   "theta": 1.0,
//!   "a": {"mu": 1.0},
//!   "b": {"beta": 1.0},
//!   "c": {"zero": true},
//!   "solver": {"feas_tol": 1e-9, "gap_tol": 1e-9, "max_iters": 200},
//!   "output": "json"
//! }
//! ```
//!
//! `theta` may be omitted, which means "optimize it". Omitted operator blocks
//! are the zero operator. The `OSPEP_SOLVER_TOL` environment variable
//! overrides both solver tolerances.

use serde::Deserialize;

use ospep_core::operators::{OperatorClass, Role};
use ospep_core::ospep::{ClassBundle, Method, MethodSpec};
use ospep_core::sdp::SolverSettings;

use crate::CliError;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassConfig {
    pub mu: Option<f64>,
    pub beta: Option<f64>,
    pub lip: Option<f64>,
    #[serde(default)]
    pub zero: bool,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub feas_tol: Option<f64>,
    pub gap_tol: Option<f64>,
    pub max_iters: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub method: Method,
    pub alpha: f64,
    #[serde(default)]
    pub theta: Option<f64>,
    #[serde(default)]
    pub a: Option<ClassConfig>,
    #[serde(default)]
    pub b: Option<ClassConfig>,
    #[serde(default)]
    pub c: Option<ClassConfig>,
    #[serde(default)]
    pub solver: Option<SolverConfig>,
    /// Accepted for schema completeness; each subcommand's output format is
    /// fixed by its contract (JSON for scalar results, CSV for curves).
    #[serde(default)]
    #[allow(dead_code)]
    pub output: OutputFormat,
}

impl ProblemConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("bad config: {e}")))
    }

    pub fn classes(&self) -> Result<ClassBundle<f64>, CliError> {
        let build = |role: Role, block: &Option<ClassConfig>| -> Result<OperatorClass<f64>, CliError> {
            let Some(block) = block else {
                return Ok(OperatorClass::zero(role));
            };
            if block.zero {
                if block.mu.is_some() || block.beta.is_some() || block.lip.is_some() {
                    return Err(CliError::Config(format!(
                        "operator {:?}: \"zero\" excludes other parameters",
                        role
                    )));
                }
                return Ok(OperatorClass::zero(role));
            }
            let class = OperatorClass {
                role,
                mu: block.mu,
                beta: block.beta,
                lip: block.lip,
                is_zero: false,
            };
            class
                .validate()
                .map_err(|e| CliError::Config(format!("operator {role:?}: {e}")))?;
            Ok(class)
        };
        let a = build(Role::A, &self.a)?;
        let b = build(Role::B, &self.b)?;
        let c = build(Role::C, &self.c)?;
        ClassBundle::new(a, b, c).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn method_spec(&self) -> Result<MethodSpec<f64>, CliError> {
        let theta = self
            .theta
            .ok_or_else(|| CliError::Config("this command requires \"theta\"".into()))?;
        MethodSpec::new(self.method, self.alpha, theta)
            .map_err(|e| CliError::Config(e.to_string()))
    }

    /// Solver settings from the config, the `OSPEP_SOLVER_TOL` environment
    /// variable (overrides both tolerances), and defaults, in that order.
    pub fn solver_settings(&self) -> Result<SolverSettings<f64>, CliError> {
        let mut settings = SolverSettings::default();
        if let Some(cfg) = &self.solver {
            if let Some(t) = cfg.feas_tol {
                settings.feas_tol = t;
            }
            if let Some(t) = cfg.gap_tol {
                settings.gap_tol = t;
            }
            if let Some(n) = cfg.max_iters {
                settings.max_iters = n;
            }
        }
        if let Ok(text) = std::env::var("OSPEP_SOLVER_TOL") {
            let tol: f64 = text.parse().map_err(|_| {
                CliError::Config(format!("OSPEP_SOLVER_TOL is not a number: {text:?}"))
            })?;
            if tol <= 0.0 {
                return Err(CliError::Config("OSPEP_SOLVER_TOL must be positive".into()));
            }
            settings.feas_tol = tol;
            settings.gap_tol = tol;
        }
        Ok(settings)
    }
}

pub fn read_config(path: &str) -> Result<ProblemConfig, CliError> {
    let text = if path == "-" {
        use std::io::Read;
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| CliError::Config(format!("reading stdin: {e}")))?;
        buf
    } else {
        std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("reading {path}: {e}")))?
    };
    ProblemConfig::from_json(&text)
}
