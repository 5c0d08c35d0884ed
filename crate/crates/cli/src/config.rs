//! Run configurations. Every field has a default; a JSON file given with
//! `--config` is read first and command-line flags override it. The resolved
//! value is echoed into each report.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use spinlab_core::ode::Scheme;
use spinlab_core::toda::MatrixRepr;
use spinlab_core::{Form, SolitonSpec};

use crate::Failure;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CmConfig {
    pub n: usize,
    pub form: Form,
    pub t_final: f64,
    pub dt: f64,
    pub scheme: Scheme,
    pub seed: Option<u64>,
    /// Write every `every`-th sample to the CSV.
    pub every: usize,
    /// Explicit initial state; the seed is not needed when given.
    pub initial: Option<CmInitial>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CmInitial {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    pub xi: MatrixRepr,
}

impl Default for CmConfig {
    fn default() -> Self {
        CmConfig {
            n: 3,
            form: Form::Compact,
            t_final: 10.0,
            dt: 1e-3,
            scheme: Scheme::Rk4,
            seed: None,
            every: 10,
            initial: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RsConfig {
    pub n: usize,
    pub t_final: f64,
    pub dt: f64,
    pub scheme: Scheme,
    pub seed: Option<u64>,
    pub every: usize,
    pub initial: Option<RsInitial>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RsInitial {
    pub q: Vec<f64>,
    pub g: MatrixRepr,
}

impl Default for RsConfig {
    fn default() -> Self {
        RsConfig {
            n: 3,
            t_final: 10.0,
            dt: 1e-3,
            scheme: Scheme::Rk4,
            seed: None,
            every: 10,
            initial: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolitonConfig {
    /// Inline soliton data; takes precedence over `spec_path`.
    pub spec: Option<SolitonSpec>,
    pub spec_path: Option<PathBuf>,
    /// Toda rank and soliton count for a random spec drawn from `seed`.
    pub rank: usize,
    pub n: usize,
    pub seed: Option<u64>,
    pub grid: GridConfig,
    pub rs_fd_step: f64,
    pub pde_fd_step: f64,
    /// Tolerance of the RS-flow residual.
    pub tol: f64,
    /// Tolerance of the field-equation residual, checked for single solitons.
    pub pde_tol: f64,
    pub adjudication_points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            lo: -2.0,
            hi: 2.0,
            count: 20,
        }
    }
}

impl Default for SolitonConfig {
    fn default() -> Self {
        SolitonConfig {
            spec: None,
            spec_path: None,
            rank: 3,
            n: 3,
            seed: None,
            grid: GridConfig::default(),
            rs_fd_step: 1e-4,
            pde_fd_step: 1e-3,
            tol: 1e-6,
            pde_tol: 1e-5,
            adjudication_points: vec![(0.0, 0.0), (0.3, -0.2)],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Mdybe,
    Jacobi,
    Involution,
    Commute,
    Lax,
    Counts,
    All,
}

impl Suite {
    pub const EACH: [Suite; 6] = [
        Suite::Mdybe,
        Suite::Jacobi,
        Suite::Involution,
        Suite::Commute,
        Suite::Lax,
        Suite::Counts,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Mdybe => "mdybe",
            Suite::Jacobi => "jacobi",
            Suite::Involution => "involution",
            Suite::Commute => "commute",
            Suite::Lax => "lax",
            Suite::Counts => "counts",
            Suite::All => "all",
        }
    }

    pub fn default_trials(self) -> usize {
        match self {
            Suite::Mdybe | Suite::Jacobi => 100,
            Suite::Involution | Suite::Commute => 20,
            Suite::Lax => 1,
            Suite::Counts => 3,
            Suite::All => 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub suite: Suite,
    pub n: usize,
    /// Trials per check; `None` uses the suite default.
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    /// Overrides every tolerance of the suite.
    pub tol: Option<f64>,
    /// Horizon and step of the trajectories in the `lax` and `involution`
    /// suites.
    pub t_final: f64,
    pub dt: f64,
    pub scheme: Scheme,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            suite: Suite::All,
            n: 3,
            trials: None,
            seed: None,
            tol: None,
            t_final: 10.0,
            dt: 1e-3,
            scheme: Scheme::Rk4,
        }
    }
}

impl VerifyConfig {
    pub fn trials_for(&self, suite: Suite) -> usize {
        self.trials.unwrap_or(suite.default_trials())
    }

    pub fn tol_or(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }
}

pub fn load<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T, Failure> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Failure::Invalid(format!("{}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| Failure::Invalid(format!("{}: {e}", p.display())))
        }
    }
}

pub fn require_seed(seed: Option<u64>) -> Result<u64, Failure> {
    seed.ok_or_else(|| Failure::Invalid("a seed is required (--seed or \"seed\" in the config)".into()))
}

pub fn check_run(n: usize, t_final: f64, dt: f64, every: usize) -> Result<(), Failure> {
    if n < 2 {
        return Err(Failure::Invalid(format!("n must be at least 2, got {n}")));
    }
    if !(t_final > 0.0 && t_final.is_finite()) {
        return Err(Failure::Invalid(format!("t_final must be positive, got {t_final}")));
    }
    if !(dt > 0.0 && dt <= t_final) {
        return Err(Failure::Invalid(format!("dt must lie in (0, t_final], got {dt}")));
    }
    if every == 0 {
        return Err(Failure::Invalid("every must be at least 1".into()));
    }
    Ok(())
}
