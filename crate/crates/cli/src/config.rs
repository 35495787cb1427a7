//! Config file schemas.
//!
//! Every config is a JSON object carrying `"schema_version": 1`; unknown
//! top-level fields are rejected so typos fail loudly instead of silently
//! falling back to defaults (tagged sub-objects — domains, methods,
//! expressions — reject unknown tags and missing parameters, but tolerate
//! extra keys). Numeric knobs that have solver defaults are optional.

use serde::Deserialize;
use std::path::PathBuf;

use crate::expr::{Expr, TestFnSpec};
use crate::CliError;

/// The one schema version this binary reads and writes.
pub const SCHEMA_VERSION: u32 = 1;

pub fn check_schema_version(version: u32) -> Result<(), CliError> {
    if version == SCHEMA_VERSION {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "config has schema_version {version}; this binary reads version {SCHEMA_VERSION}"
        )))
    }
}

/// Read and parse a config file of type `T`.
pub fn load<T: serde::de::DeserializeOwned>(path: &Option<PathBuf>, cmd: &str) -> Result<T, CliError> {
    let Some(path) = path else {
        return Err(CliError::Usage(format!(
            "the {cmd} subcommand needs --config <path> (see `plap {cmd} --help` for the schema)"
        )));
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
}

/// Planar domain, mirroring the solver's exact signed-distance shapes.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainSpec {
    Ball { center: [f64; 2], radius: f64 },
    Box { lo: [f64; 2], hi: [f64; 2] },
}

impl DomainSpec {
    pub fn build(&self) -> plap::grid::Domain {
        match self {
            DomainSpec::Ball { center, radius } => {
                plap::grid::Domain::Ball { center: *center, radius: *radius }
            }
            DomainSpec::Box { lo, hi } => plap::grid::Domain::Box { lo: *lo, hi: *hi },
        }
    }
}

/// Sweep order for the fixed-point iteration.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeSpec {
    Picard,
    GaussSeidel,
}

impl ModeSpec {
    pub fn build(self) -> plap::solver::SweepMode {
        match self {
            ModeSpec::Picard => plap::solver::SweepMode::Picard,
            ModeSpec::GaussSeidel => plap::solver::SweepMode::GaussSeidel,
        }
    }
}

/// Interpolation order for off-lattice stencil reads.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterpSpec {
    Multilinear,
    Cubic,
}

impl InterpSpec {
    pub fn build(self) -> plap::grid::Interpolation {
        match self {
            InterpSpec::Multilinear => plap::grid::Interpolation::Multilinear,
            InterpSpec::Cubic => plap::grid::Interpolation::Cubic,
        }
    }
}

/// Interior start value for the iteration.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitSpec {
    Zero,
    CollarMean,
    LowerEnvelope,
}

impl InitSpec {
    pub fn build(self) -> plap::solver::InitStrategy {
        match self {
            InitSpec::Zero => plap::solver::InitStrategy::Zero,
            InitSpec::CollarMean => plap::solver::InitStrategy::CollarMean,
            InitSpec::LowerEnvelope => plap::solver::InitStrategy::LowerEnvelope,
        }
    }
}

/// Over-relaxation: `"off"`, `"auto"`, or a literal `ω ∈ [1, 2)`.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
pub enum RelaxationSpec {
    Named(NamedRelaxation),
    Omega(f64),
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedRelaxation {
    Off,
    Auto,
}

impl RelaxationSpec {
    pub fn build(self) -> plap::solver::Relaxation {
        match self {
            RelaxationSpec::Named(NamedRelaxation::Off) => plap::solver::Relaxation::Off,
            RelaxationSpec::Named(NamedRelaxation::Auto) => plap::solver::Relaxation::Auto,
            RelaxationSpec::Omega(omega) => plap::solver::Relaxation::Fixed(omega),
        }
    }
}

/// Quadrature backend for pointwise operator evaluation.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum MethodSpec {
    /// Error-controlled panels (slow, tight).
    Adaptive {
        abs_tol: f64,
        #[serde(default = "default_max_panels")]
        max_panels: usize,
    },
    /// Fixed tensor rule with `resolution` radial shells.
    FixedRule { resolution: usize },
}

fn default_max_panels() -> usize {
    40_000
}

impl MethodSpec {
    pub fn build(&self) -> plap::meanvalue::MvfMethod {
        match self {
            MethodSpec::Adaptive { abs_tol, max_panels } => {
                plap::meanvalue::MvfMethod::Adaptive { abs_tol: *abs_tol, max_panels: *max_panels }
            }
            MethodSpec::FixedRule { resolution } => {
                plap::meanvalue::MvfMethod::FixedRule { resolution: *resolution }
            }
        }
    }
}

/// `plap consistency` — operator values against the classical reference.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConsistencyConfig {
    pub schema_version: u32,
    pub p: f64,
    /// Test function with exact derivatives.
    pub function: TestFnSpec,
    /// Evaluation point; its length fixes the dimension.
    pub x: Vec<f64>,
    /// Strictly decreasing radii. Default: `0.1 · 2^{−k}`, k = 0..4.
    #[serde(default)]
    pub radii: Option<Vec<f64>>,
    /// Default: adaptive with `abs_tol = 1e−9`.
    #[serde(default)]
    pub method: Option<MethodSpec>,
    /// Absolute tolerance for the normalization constants. Default `1e−12`.
    #[serde(default)]
    pub constants_tol: Option<f64>,
}

/// `plap solve` — one boundary-value solve.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    pub schema_version: u32,
    pub domain: DomainSpec,
    pub p: f64,
    /// Averaging radius.
    pub r: f64,
    /// Lattice spacing.
    pub h: f64,
    /// Source term.
    pub f: Expr,
    /// Collar data.
    #[serde(rename = "G")]
    pub g: Expr,
    /// Exact solution for error reporting, when known.
    #[serde(default)]
    pub exact: Option<Expr>,
    pub mode: ModeSpec,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub max_iter: Option<usize>,
    /// Recorded in the output for provenance; the solve itself is
    /// deterministic and draws no random numbers.
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub interpolation: Option<InterpSpec>,
    #[serde(default)]
    pub init: Option<InitSpec>,
    #[serde(default)]
    pub relaxation: Option<RelaxationSpec>,
    #[serde(default)]
    pub root_tol_a: Option<f64>,
    #[serde(default)]
    pub root_tol_residual: Option<f64>,
    #[serde(default)]
    pub n_radial: Option<usize>,
    #[serde(default)]
    pub n_angular: Option<usize>,
}

impl SolveConfig {
    /// Fold the optional knobs over the solver defaults.
    pub fn options(&self) -> plap::solver::SolverOptions {
        let mut opts = plap::solver::SolverOptions::default();
        opts.mode = self.mode.build();
        if let Some(interp) = self.interpolation {
            opts.interpolation = interp.build();
        }
        if let Some(init) = self.init {
            opts.init = init.build();
        }
        if let Some(relax) = self.relaxation {
            opts.relaxation = relax.build();
        }
        if let Some(tol) = self.tol {
            opts.tol = tol;
        }
        if let Some(max_iter) = self.max_iter {
            opts.max_sweeps = max_iter;
        }
        if let Some(t) = self.root_tol_a {
            opts.root_tol_a = t;
        }
        if let Some(t) = self.root_tol_residual {
            opts.root_tol_residual = t;
        }
        if let Some(n) = self.n_radial {
            opts.n_radial = n;
        }
        if let Some(n) = self.n_angular {
            opts.n_angular = n;
        }
        opts
    }
}

/// `plap converge` — the solve error across a decreasing radius schedule.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergeConfig {
    pub schema_version: u32,
    pub domain: DomainSpec,
    pub p: f64,
    /// Strictly decreasing averaging radii.
    pub radii: Vec<f64>,
    /// Lattice spacing rule `h = h_factor · r`. Default `0.25`.
    #[serde(default)]
    pub h_factor: Option<f64>,
    pub f: Expr,
    #[serde(rename = "G")]
    pub g: Expr,
    /// Required: the study reports errors against it.
    pub exact: Expr,
    pub mode: ModeSpec,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub max_iter: Option<usize>,
    #[serde(default)]
    pub interpolation: Option<InterpSpec>,
    #[serde(default)]
    pub relaxation: Option<RelaxationSpec>,
    #[serde(default)]
    pub root_tol_a: Option<f64>,
    #[serde(default)]
    pub root_tol_residual: Option<f64>,
    #[serde(default)]
    pub n_radial: Option<usize>,
    #[serde(default)]
    pub n_angular: Option<usize>,
}

impl ConvergeConfig {
    pub fn options(&self) -> plap::solver::SolverOptions {
        let mut opts = plap::solver::SolverOptions::default();
        opts.mode = self.mode.build();
        if let Some(interp) = self.interpolation {
            opts.interpolation = interp.build();
        }
        if let Some(relax) = self.relaxation {
            opts.relaxation = relax.build();
        }
        if let Some(tol) = self.tol {
            opts.tol = tol;
        }
        if let Some(max_iter) = self.max_iter {
            opts.max_sweeps = max_iter;
        }
        if let Some(t) = self.root_tol_a {
            opts.root_tol_a = t;
        }
        if let Some(t) = self.root_tol_residual {
            opts.root_tol_residual = t;
        }
        if let Some(n) = self.n_radial {
            opts.n_radial = n;
        }
        if let Some(n) = self.n_angular {
            opts.n_angular = n;
        }
        opts
    }
}

/// `plap hodograph` — the vanishing mean value integral of a plane profile.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HodographConfig {
    pub schema_version: u32,
    pub p: f64,
    /// Angular frequency `n ≥ 1` of the profile.
    pub n: usize,
    /// Leading coefficient `c > 0`.
    pub c: f64,
    /// Radial exponent of the gradient magnitude.
    pub alpha: f64,
    /// Radial exponent `β > 0` of the profile.
    pub beta: f64,
    /// Asymmetry `|ε| < 1/(2n+1)`.
    pub epsilon: f64,
    /// Radius of the disc the integral runs over.
    pub radius: f64,
}

/// `plap verify-inequalities` — shared config for the three lemma checks;
/// the lemma is picked on the command line and reads only its own knobs.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InequalityConfig {
    pub schema_version: u32,
    /// Exponent for the pointwise inequalities (a1 needs `p ≥ 2`, a2 needs
    /// `p ∈ (1,2)`); unused by a3.
    #[serde(default)]
    pub p: Option<f64>,
    /// Expansion scale `ε > 0` (a1 only). Default `1e−3`.
    #[serde(default)]
    pub eps: Option<f64>,
    /// Random sample count (a1, a2). Default `100_000`.
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Singularity strength `s ∈ (0,1)` (a3). Default `0.5`.
    #[serde(default)]
    pub s: Option<f64>,
    /// Dimension (a3). Default `2`.
    #[serde(default)]
    pub dim: Option<usize>,
    /// Random quadratic forms to average over (a3). Default `8`.
    #[serde(default)]
    pub n_forms: Option<usize>,
    /// Relative tolerance for the refinement ladder (a3). Default `1e−2`.
    #[serde(default)]
    pub rel_tol: Option<f64>,
    /// Node budget per form (a3). Default `1 << 22`.
    #[serde(default)]
    pub max_nodes: Option<usize>,
}
