//! Structured-text (TOML) run configuration.
//!
//! Every section is optional; subcommands read the parts they need and
//! command-line flags override individual entries. A minimal solve config:
//!
//! ```toml
//! [geometry]
//! grid = 64
//!
//! [bundle]
//! rank = 2
//! f0 = 2.0
//!
//! [target]
//! constant = 3.0
//!
//! [output]
//! dir = "out"
//! ```

use serde::Deserialize;
use std::path::PathBuf;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub geometry: GeometryConfig,
    #[serde(default)]
    pub bundle: BundleConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub target: TargetConfig,
    #[serde(default)]
    pub scalar: ScalarConfig,
    #[serde(default)]
    pub normalize: NormalizeConfig,
    #[serde(default)]
    pub chern: ChernConfig,
    #[serde(default)]
    pub counterexample: CounterexampleConfig,
    #[serde(default)]
    pub nonexistence: NonexistenceConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    /// Complex dimension; defaults to the subcommand's natural value
    /// (1 for solves, 2 for the curvature calculators).
    pub n: Option<usize>,
    /// Grid points per real axis (all axes equal).
    pub grid: Option<usize>,
    /// Per-axis grid sizes (overrides `grid`).
    pub dims: Option<Vec<usize>>,
    /// Per-axis periods; default 1.0 each.
    pub periods: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleConfig {
    pub rank: usize,
    /// Constant reference scalar.
    pub f0: f64,
    /// Optional HYMF file with a positive real reference scalar field.
    pub f0_path: Option<PathBuf>,
    pub degree: i64,
}

impl Default for BundleConfig {
    fn default() -> Self {
        Self {
            rank: 2,
            f0: 2.0,
            f0_path: None,
            degree: 0,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub tol: Option<f64>,
    pub max_newton: Option<usize>,
    pub continuation_steps: Option<usize>,
    pub damping_min: Option<f64>,
    pub forcing_max: Option<f64>,
    pub linear_max_iter: Option<usize>,
    /// Optional HYMF file with an initial metric representative.
    pub initial_guess_path: Option<PathBuf>,
}

#[derive(Debug, Deserialize, Clone)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub seed: u64,
    #[serde(default = "default_bandwidth")]
    pub bandwidth: usize,
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
}

fn default_bandwidth() -> usize {
    2
}

fn default_amplitude() -> f64 {
    0.25
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetConfig {
    /// c·Id prescription.
    pub constant: Option<f64>,
    /// HYMF file with the prescription representative.
    pub path: Option<PathBuf>,
    /// Manufactured prescription: the trace of curvature of a seeded
    /// random positive metric (the metric is written next to the outputs).
    pub manufactured: Option<GeneratorSpec>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalarConfig {
    pub density_constant: Option<f64>,
    pub density_path: Option<PathBuf>,
    /// Manufactured positive density from a seeded conformal factor.
    pub manufactured: Option<GeneratorSpec>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormalizeConfig {
    /// HYMF file with the Hermitian reference tensor to normalize.
    pub input: Option<PathBuf>,
    /// Seeded Hermitian tensor Id·shift + perturbation.
    pub synthetic: Option<SyntheticOmega>,
}

#[derive(Debug, Deserialize, Clone)]
#[serde(deny_unknown_fields)]
pub struct SyntheticOmega {
    pub seed: u64,
    #[serde(default = "default_rank")]
    pub rank: usize,
    #[serde(default = "default_bandwidth")]
    pub bandwidth: usize,
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
    #[serde(default = "default_shift")]
    pub shift: f64,
}

fn default_rank() -> usize {
    2
}

fn default_shift() -> f64 {
    2.0
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChernConfig {
    /// HYMF curvature file.
    pub input: Option<PathBuf>,
    /// Genuine curvature of a seeded random positive metric (bundle case).
    pub from_metric: Option<FromMetricSpec>,
    /// Seeded symmetric random data (Kähler case).
    pub synthetic: Option<GeneratorSpec>,
}

#[derive(Debug, Deserialize, Clone)]
#[serde(deny_unknown_fields)]
pub struct FromMetricSpec {
    pub seed: u64,
    #[serde(default = "default_rank")]
    pub rank: usize,
    #[serde(default = "default_fm_bandwidth")]
    pub bandwidth: usize,
    #[serde(default = "default_fm_amplitude")]
    pub amplitude: f64,
}

fn default_fm_bandwidth() -> usize {
    1
}

fn default_fm_amplitude() -> f64 {
    0.3
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CounterexampleConfig {
    pub f0: f64,
    pub amplitude: f64,
    pub t_lo: f64,
    pub t_hi: f64,
    pub tol_bisect: f64,
    pub cusp: [usize; 2],
    pub max_rescale: usize,
}

impl Default for CounterexampleConfig {
    fn default() -> Self {
        let d = hym_core::CounterexampleOptions::default();
        Self {
            f0: d.f0,
            amplitude: d.amplitude,
            t_lo: d.t_lo,
            t_hi: d.t_hi,
            tol_bisect: d.tol_bisect,
            cusp: d.cusp_point,
            max_rescale: d.max_rescale,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonexistenceConfig {
    pub density_constant: Option<f64>,
    pub density_path: Option<PathBuf>,
    pub attempt: bool,
}

impl Default for NonexistenceConfig {
    fn default() -> Self {
        Self {
            density_constant: None,
            density_path: None,
            attempt: false,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
}
