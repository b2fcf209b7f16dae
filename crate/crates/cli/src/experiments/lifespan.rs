//! Exit time of the free solution as a function of `κ̄`.

use serde::Serialize;

use korteweg_core::besov::{BesovParams, DyadicPartition};
use korteweg_core::coefficients::Coefficients;
use korteweg_core::lagrangian::{capillary_tensor, dealiased_divergence};
use korteweg_core::ops;
use korteweg_core::solver::{ExitSamples, FreeSolution};
use korteweg_core::{Field, TensorField, VectorField};

use crate::config::{ExperimentConfig, LifespanSettings};
use crate::error::{CliError, Context};
use crate::fit::{fit_power_law, FitResult};
use crate::output::{kappa_key, num, opt_num, Sink};
use crate::predictor::{lifespan_predictor, Prediction, VelocityNorms};

use super::run_sweep;

/// Largest number of horizon changes while bracketing the exit.
const MAX_HORIZON_CHANGES: usize = 80;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExitMeasurement {
    /// Unit-viscosity exit time, linearly interpolated between samples.
    pub exit_unit: f64,
    /// Horizon of the final sampling.
    pub horizon_unit: f64,
    pub times: Vec<f64>,
    pub running: Vec<f64>,
}

/// Samples the exact free solution on `[0, H]` and adjusts `H` until the
/// running aggregate crosses `ε/2` in the second half of the window.
pub fn measure_exit(
    coeffs: &Coefficients,
    u0_unit: &VectorField,
    settings: &LifespanSettings,
    p: f64,
) -> Result<ExitMeasurement, CliError> {
    let ctx = || format!("exit time (kappa_bar = {:e})", coeffs.kappa_bar);
    let free = FreeSolution::new(coeffs, u0_unit).context(ctx)?;
    let half = 0.5 * settings.epsilon;
    let coarse = (settings.samples / 8).max(16);
    let sample = |h: f64, n: usize| -> Result<(Vec<f64>, Vec<f64>), CliError> {
        let times: Vec<f64> = (0..=n).map(|k| h * k as f64 / n as f64).collect();
        let s = ExitSamples::from_free(&free, &times, p).context(ctx)?;
        let run = s.running();
        Ok((times, run))
    };
    let mut h = coeffs.mu_bar * settings.horizon;
    let mut n = coarse;
    for _ in 0..MAX_HORIZON_CHANGES {
        let (times, run) = sample(h, n)?;
        match run.iter().position(|&v| v > half) {
            None => h *= 2.0,
            Some(e) if e <= n / 2 => h = times[e],
            Some(e) if n < settings.samples => {
                h = times[e];
                n = settings.samples;
            }
            Some(e) => {
                let (t0, t1, r0, r1) = (times[e - 1], times[e], run[e - 1], run[e]);
                let exit_unit = t0 + (half - r0) / (r1 - r0) * (t1 - t0);
                return Ok(ExitMeasurement { exit_unit, horizon_unit: h, times, running: run });
            }
        }
    }
    Err(CliError::Solver {
        context: ctx(),
        source: korteweg_core::Error::InvalidArgument(format!("no exit found up to horizon {h:e}")),
    })
}

/// `‖F_ρ₀‖_{Ḃ^{n/p−1}_{p,1}} + ‖F_ρ₀‖_{Ḃ^{n/p−2}_{p,1}}` with
/// `F_ρ₀ = div(k(ρ₀)∇ρ₀⊗∇ρ₀)`.
pub fn calibrate_c_rho0(coeffs: &Coefficients, p: f64) -> Result<f64, CliError> {
    let rho0 = &coeffs.rho0;
    let grid = rho0.grid();
    let grad = ops::gradient(rho0).to_physical();
    let t = capillary_tensor(rho0, &grad, &TensorField::identity(grid), &coeffs.k_fn);
    let f = dealiased_divergence(&t);
    let part = DyadicPartition::new(grid);
    let a = part.besov_norm(&f, BesovParams::sum(2.0 / p - 1.0, p)).context(|| "C_rho0".into())?;
    let b = part.besov_norm(&f, BesovParams::sum(2.0 / p - 2.0, p)).context(|| "C_rho0".into())?;
    Ok(a + b)
}

pub fn velocity_norms(u0: &VectorField, p: f64) -> Result<VelocityNorms, CliError> {
    let part = DyadicPartition::new(u0.grid());
    let critical = part.besov_norm(u0, BesovParams::sum(2.0 / p, p)).context(|| "u0 norms".into())?;
    let plus_one = part.besov_norm(u0, BesovParams::sum(2.0 / p + 1.0, p)).context(|| "u0 norms".into())?;
    Ok(VelocityNorms { critical, plus_one })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LifespanPoint {
    pub kappa_bar: f64,
    /// Original-frame exit time.
    pub exit_time: Option<f64>,
    pub exit_unit: Option<f64>,
    pub prediction: Option<Prediction>,
    /// The predictor exceeded the measured exit time.
    pub violation: bool,
    pub error: Option<String>,
    #[serde(skip)]
    pub measurement: Option<ExitMeasurement>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LifespanStudy {
    pub epsilon: f64,
    pub c: f64,
    pub c_rho0: f64,
    pub velocity_norms: VelocityNorms,
    pub points: Vec<LifespanPoint>,
    /// Exit time against `κ̄`; failed runs are left out.
    pub fit: Option<FitResult>,
    /// Mean of `exit·κ̄/μ̄`, the constant in `T_κ̄ = Cμ̄/κ̄`.
    pub implied_constant: Option<f64>,
    pub violations: usize,
}

pub fn lifespan_study(cfg: &ExperimentConfig) -> Result<LifespanStudy, CliError> {
    cfg.validate_sweep(3)?;
    let grid = cfg.make_grid()?;
    let base = cfg.coefficients(&grid, cfg.sweep[0])?;
    let u0 = cfg.velocity(&grid)?;
    let u0_unit = u0.scale(1.0 / cfg.mu_bar);
    let p = cfg.tolerances.picard.p;
    let s = &cfg.lifespan;
    let c_rho0 = match s.c_rho0 {
        Some(c) => c,
        None => calibrate_c_rho0(&base, p)?,
    };
    let norms = velocity_norms(&u0, p)?;
    let points = run_sweep(&cfg.sweep, |k| {
        let coeffs = base.with_kappa_bar(k);
        let prediction = if c_rho0 > 0.0 { lifespan_predictor(norms, c_rho0, cfg.mu_bar, k, s.epsilon, s.c).ok() } else { None };
        match measure_exit(&coeffs, &u0_unit, s, p) {
            Ok(m) => {
                let exit = m.exit_unit / cfg.mu_bar;
                let violation = prediction.map_or(false, |pr| pr.t0 > exit);
                if violation {
                    log::warn!("predictor {:e} exceeds measured exit {:e} at kappa_bar = {:e}", prediction.unwrap().t0, exit, k);
                }
                LifespanPoint {
                    kappa_bar: k,
                    exit_time: Some(exit),
                    exit_unit: Some(m.exit_unit),
                    prediction,
                    violation,
                    error: None,
                    measurement: Some(m),
                }
            }
            Err(e) => LifespanPoint {
                kappa_bar: k,
                exit_time: None,
                exit_unit: None,
                prediction,
                violation: false,
                error: Some(e.to_string()),
                measurement: None,
            },
        }
    });
    let good: Vec<(f64, f64)> = points.iter().filter_map(|p| p.exit_time.map(|t| (p.kappa_bar, t))).collect();
    let fit = if good.len() >= 3 { Some(fit_power_law(&good)?) } else { None };
    let implied_constant =
        (!good.is_empty()).then(|| good.iter().map(|&(k, t)| t * k / cfg.mu_bar).sum::<f64>() / good.len() as f64);
    let violations = points.iter().filter(|p| p.violation).count();
    Ok(LifespanStudy { epsilon: s.epsilon, c: s.c, c_rho0, velocity_norms: norms, points, fit, implied_constant, violations })
}

pub fn write(study: &LifespanStudy, sink: &mut Sink) -> Result<(), CliError> {
    let rows: Vec<Vec<String>> = study
        .points
        .iter()
        .map(|p| {
            vec![
                num(p.kappa_bar),
                opt_num(p.exit_time),
                opt_num(p.exit_unit),
                opt_num(p.prediction.map(|x| x.t0)),
                p.violation.to_string(),
                p.error.clone().unwrap_or_default(),
            ]
        })
        .collect();
    sink.csv("lifespan.csv", &["kappa_bar", "exit_time", "exit_time_unit", "predictor_t0", "violation", "error"], &rows)?;
    for p in &study.points {
        if let Some(m) = &p.measurement {
            let rows: Vec<Vec<String>> = m.times.iter().zip(&m.running).map(|(t, r)| vec![num(*t), num(*r)]).collect();
            sink.csv(&format!("exit_{}.csv", kappa_key(p.kappa_bar)), &["t_unit", "running_aggregate"], &rows)?;
        }
    }
    sink.json("lifespan.json", study)?;
    Ok(())
}
