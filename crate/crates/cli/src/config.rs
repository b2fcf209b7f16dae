//! JSON run manifest and experiment settings.

use std::f64::consts::PI;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use korteweg_core::coefficients::{CoefficientFn, Coefficients, DEFAULT_RHO_FLOOR};
use korteweg_core::solver::{EulerianConfig, PicardConfig, Route};
use korteweg_core::{Field, Grid, ScalarField, VectorField};

use crate::error::CliError;

/// Initial density.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DensitySpec {
    Constant {
        value: f64,
    },
    /// `1 + a·exp(−(x−c₁)²/2σ₁² − (y−c₂)²/2σ₂²)`.
    Bump {
        amplitude: f64,
        #[serde(default = "center")]
        center: [f64; 2],
        sigma: [f64; 2],
    },
    /// `1 + a·Σ cos(k·x)`.
    Modes {
        amplitude: f64,
        modes: Vec<[i64; 2]>,
    },
    /// `1 + a·g` with `g` a seeded trigonometric polynomial of degree
    /// `cutoff`, normalized to `max|g| = 1`.
    Random {
        amplitude: f64,
        cutoff: i64,
    },
}

/// Initial velocity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VelocitySpec {
    Zero,
    /// `a(sin kx cos ky, −cos kx sin ky)`.
    TaylorGreen {
        amplitude: f64,
        #[serde(default = "one_i64")]
        k: i64,
    },
    /// `a·Σ_m (−sin m(x+y), sin m(x+y))`, one mode per listed `m`.
    Diagonal {
        amplitude: f64,
        modes: Vec<i64>,
    },
    /// `∇^⊥ψ` for a seeded stream function of degree `cutoff`, normalized
    /// to `max|u| = a`.
    Random {
        amplitude: f64,
        cutoff: i64,
    },
}

fn center() -> [f64; 2] {
    [PI, PI]
}

fn one_i64() -> i64 {
    1
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    #[default]
    Lagrangian,
    Eulerian,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

/// Solver tolerances; every field has a default.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub picard: PicardConfig,
    pub eulerian: EulerianConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LifespanSettings {
    /// `ε` of the exit condition.
    pub epsilon: f64,
    /// First horizon tried (original frame); doubled until the exit is seen.
    pub horizon: f64,
    /// Samples per horizon.
    pub samples: usize,
    /// The constant `C` of the predictor.
    pub c: f64,
    /// `C_ρ₀`; calibrated from `ρ₀` when absent.
    pub c_rho0: Option<f64>,
}

impl Default for LifespanSettings {
    fn default() -> Self {
        LifespanSettings { epsilon: 1e-2, horizon: 1.0, samples: 400, c: 1.0, c_rho0: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConvergenceSettings {
    /// Every how many stored times the density difference is evaluated.
    pub pushforward_stride: usize,
}

impl Default for ConvergenceSettings {
    fn default() -> Self {
        ConvergenceSettings { pushforward_stride: 10 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LpSettings {
    /// Snapshot to analyze; relative paths resolve against the working directory.
    pub snapshot: Option<PathBuf>,
    pub s: f64,
    pub p: f64,
}

impl Default for LpSettings {
    fn default() -> Self {
        LpSettings { snapshot: None, s: 0.0, p: 2.0 }
    }
}

fn default_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Json]
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

fn default_floor() -> f64 {
    DEFAULT_RHO_FLOOR
}

fn default_mu_bar() -> f64 {
    1.0
}

fn default_density() -> DensitySpec {
    DensitySpec::Constant { value: 1.0 }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Points per dimension.
    pub grid: usize,
    /// Time step, original frame.
    pub dt: f64,
    /// Final time, original frame.
    #[serde(rename = "T")]
    pub t_final: f64,
    #[serde(default = "default_mu_bar")]
    pub mu_bar: f64,
    #[serde(default)]
    pub kappa_bar: f64,
    /// Coefficients `c_m` of `μ(ρ) = 1 + Σ c_m(ρ − 1)^m`.
    #[serde(default)]
    pub mu_fn: Vec<f64>,
    #[serde(default)]
    pub k_fn: Vec<f64>,
    #[serde(default = "default_density")]
    pub rho0: DensitySpec,
    #[serde(default = "default_floor")]
    pub rho_floor: f64,
    pub u0: VelocitySpec,
    #[serde(default)]
    pub route: Route,
    #[serde(default)]
    pub solver: SolverKind,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub seed: u64,
    /// `κ̄` values of a sweep, strictly decreasing.
    #[serde(default)]
    pub sweep: Vec<f64>,
    /// Exponents the convergence fits are compared with.
    #[serde(default)]
    pub alpha_targets: Vec<f64>,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
    /// Also write the final Eulerian velocity as a snapshot (`simulate`).
    #[serde(default)]
    pub write_snapshot: bool,
    #[serde(default)]
    pub lifespan: LifespanSettings,
    #[serde(default)]
    pub convergence: ConvergenceSettings,
    #[serde(default)]
    pub lp: LpSettings,
}

fn invalid(field: &str, message: impl Into<String>) -> CliError {
    CliError::Config { field: field.to_string(), message: message.into() }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| invalid("<manifest>", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.grid < 8 || !self.grid.is_power_of_two() {
            return Err(invalid("grid", format!("{} is not a power of two ≥ 8", self.grid)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(invalid("dt", "must be positive"));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(invalid("T", "must be positive"));
        }
        let ratio = self.t_final / self.dt;
        if (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) {
            return Err(invalid("dt", format!("T/dt = {ratio} is not an integer")));
        }
        if !(self.mu_bar > 0.0 && self.mu_bar.is_finite()) {
            return Err(invalid("mu_bar", "must be positive"));
        }
        if !(self.kappa_bar >= 0.0 && self.kappa_bar.is_finite()) {
            return Err(invalid("kappa_bar", "must be nonnegative"));
        }
        if !(self.rho_floor > 0.0) {
            return Err(invalid("rho_floor", "must be positive"));
        }
        if self.formats.is_empty() {
            return Err(invalid("formats", "at least one output format is required"));
        }
        match &self.rho0 {
            DensitySpec::Constant { value } if !(*value > 0.0) => return Err(invalid("rho0.value", "must be positive")),
            DensitySpec::Bump { sigma, .. } if !(sigma[0] > 0.0 && sigma[1] > 0.0) => {
                return Err(invalid("rho0.sigma", "must be positive"))
            }
            DensitySpec::Random { cutoff, .. } if *cutoff < 1 => return Err(invalid("rho0.cutoff", "must be ≥ 1")),
            _ => {}
        }
        if let VelocitySpec::Random { cutoff, .. } = &self.u0 {
            if *cutoff < 1 {
                return Err(invalid("u0.cutoff", "must be ≥ 1"));
            }
        }
        let t = &self.tolerances.picard;
        if !(t.tol > 0.0) {
            return Err(invalid("tolerances.picard.tol", "must be positive"));
        }
        if !(t.epsilon0 > 0.0) {
            return Err(invalid("tolerances.picard.epsilon0", "must be positive"));
        }
        if !(t.p >= 1.0) {
            return Err(invalid("tolerances.picard.p", "must be ≥ 1"));
        }
        Ok(())
    }

    /// Sweep requirements: positive, strictly decreasing, at least one decade.
    pub fn validate_sweep(&self, min_points: usize) -> Result<(), CliError> {
        let s = &self.sweep;
        if s.len() < min_points {
            return Err(invalid("sweep", format!("needs at least {min_points} values, got {}", s.len())));
        }
        if s.iter().any(|&k| !(k > 0.0 && k.is_finite())) {
            return Err(invalid("sweep", "values must be positive"));
        }
        if s.windows(2).any(|w| w[1] >= w[0]) {
            return Err(invalid("sweep", "values must be strictly decreasing"));
        }
        if s[0] / s[s.len() - 1] < 10.0 * (1.0 - 1e-12) {
            return Err(invalid("sweep", "values must span at least one decade"));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }

    pub fn make_grid(&self) -> Result<Grid, CliError> {
        Grid::new(self.grid).map_err(|e| invalid("grid", e.to_string()))
    }

    pub fn density(&self, grid: &Grid) -> Result<ScalarField, CliError> {
        Ok(match &self.rho0 {
            DensitySpec::Constant { value } => ScalarField::constant(grid, *value),
            DensitySpec::Bump { amplitude, center, sigma } => ScalarField::from_fn(grid, |x, y| {
                let q = (x - center[0]).powi(2) / (2.0 * sigma[0] * sigma[0])
                    + (y - center[1]).powi(2) / (2.0 * sigma[1] * sigma[1]);
                1.0 + amplitude * (-q).exp()
            }),
            DensitySpec::Modes { amplitude, modes } => ScalarField::from_fn(grid, |x, y| {
                1.0 + amplitude * modes.iter().map(|k| (k[0] as f64 * x + k[1] as f64 * y).cos()).sum::<f64>()
            }),
            DensitySpec::Random { amplitude, cutoff } => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                let g = random_polynomial(grid, *cutoff, &mut rng);
                let m = g.norm_linf().max(f64::MIN_POSITIVE);
                g.map_physical(|v| 1.0 + amplitude * v / m)
            }
        })
    }

    pub fn velocity(&self, grid: &Grid) -> Result<VectorField, CliError> {
        Ok(match &self.u0 {
            VelocitySpec::Zero => VectorField::zeros(grid),
            VelocitySpec::TaylorGreen { amplitude, k } => {
                let (a, k) = (*amplitude, *k as f64);
                VectorField::from_fn(grid, |x, y| [a * (k * x).sin() * (k * y).cos(), -a * (k * x).cos() * (k * y).sin()])
            }
            VelocitySpec::Diagonal { amplitude, modes } => {
                let a = *amplitude;
                VectorField::from_fn(grid, |x, y| {
                    let s: f64 = modes.iter().map(|&m| (m as f64 * (x + y)).sin()).sum();
                    [-a * s, a * s]
                })
            }
            VelocitySpec::Random { amplitude, cutoff } => {
                // Separate stream from the density so the two stay independent.
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ 0x9e37_79b9_7f4a_7c15);
                let psi = random_polynomial(grid, *cutoff, &mut rng);
                let g = korteweg_core::ops::gradient(&psi);
                let u = VectorField::from_components(vec![g.component(1).clone(), g.component(0).scale(-1.0)]).to_physical();
                let m = u.norm_linf().max(f64::MIN_POSITIVE);
                u.scale(amplitude / m)
            }
        })
    }

    /// Physical coefficients for `kappa_bar` (the sweep value or the manifest's).
    pub fn coefficients(&self, grid: &Grid, kappa_bar: f64) -> Result<Coefficients, CliError> {
        let rho0 = self.density(grid)?;
        Coefficients::new(
            self.mu_bar,
            kappa_bar,
            CoefficientFn::new(self.mu_fn.clone()),
            CoefficientFn::new(self.k_fn.clone()),
            rho0,
            self.rho_floor,
        )
        .map_err(|e| invalid("rho0", e.to_string()))
    }
}

fn random_polynomial(grid: &Grid, cutoff: i64, rng: &mut ChaCha8Rng) -> ScalarField {
    let mut terms = Vec::new();
    for k1 in -cutoff..=cutoff {
        for k2 in 0..=cutoff {
            if k2 == 0 && k1 <= 0 {
                continue;
            }
            let decay = 1.0 / (1.0 + (k1 * k1 + k2 * k2) as f64);
            terms.push((k1 as f64, k2 as f64, decay * rng.gen_range(-1.0..1.0), decay * rng.gen_range(-1.0..1.0)));
        }
    }
    ScalarField::from_fn(grid, |x, y| {
        terms.iter().map(|&(k1, k2, a, b)| a * (k1 * x + k2 * y).cos() + b * (k1 * x + k2 * y).sin()).sum()
    })
}

impl ExperimentConfig {
    /// A small manifest with the given initial data, for tests and examples.
    pub fn minimal(grid: usize, dt: f64, t_final: f64, u0: VelocitySpec) -> Self {
        ExperimentConfig {
            grid,
            dt,
            t_final,
            mu_bar: 1.0,
            kappa_bar: 0.0,
            mu_fn: vec![],
            k_fn: vec![],
            rho0: default_density(),
            rho_floor: DEFAULT_RHO_FLOOR,
            u0,
            route: Route::default(),
            solver: SolverKind::default(),
            tolerances: Tolerances::default(),
            seed: 0,
            sweep: vec![],
            alpha_targets: vec![],
            output_dir: default_output(),
            formats: default_formats(),
            write_snapshot: false,
            lifespan: LifespanSettings::default(),
            convergence: ConvergenceSettings::default(),
            lp: LpSettings::default(),
        }
    }
}
