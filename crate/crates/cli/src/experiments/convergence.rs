//! Differences between capillary runs and the `κ̄ = 0` run on the same mesh.

use serde::Serialize;

use korteweg_core::besov::{BesovParams, DyadicPartition};
use korteweg_core::coefficients::Coefficients;
use korteweg_core::solver::{
    energy_norm, picard_solve, pushforward_inverse_rescale, pushforward_solution, PicardOutput,
};
use korteweg_core::{ScalarField, VectorField};

use crate::config::ExperimentConfig;
use crate::error::{CliError, Context};
use crate::fit::{fit_power_law, FitResult};
use crate::output::{num, opt_num, Sink};

use super::run_sweep;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergencePoint {
    pub kappa_bar: f64,
    /// `‖(u − u_κ̄, ∇P − ∇P_κ̄)‖_{E_T}` in Lagrangian coordinates, original frame.
    pub e_diff: Option<f64>,
    /// `sup_t ‖ρ₀∘X_κ̄^{-1} − ρ₀∘X^{-1}‖_{Ḃ^{n/p}_{p,1}}` over the thinned mesh.
    pub density_diff: Option<f64>,
    pub iterations: Option<usize>,
    pub converged: Option<bool>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlphaCheck {
    pub alpha: f64,
    /// `α` for the velocity, `(3α − 1)/2` for the density.
    pub velocity_target: f64,
    pub density_target: f64,
    pub velocity_gap: Option<f64>,
    pub density_gap: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceStudy {
    pub baseline_iterations: usize,
    pub points: Vec<ConvergencePoint>,
    pub e_fit: Option<FitResult>,
    pub density_fit: Option<FitResult>,
    pub alpha_targets: Vec<AlphaCheck>,
}

struct Run {
    out: PicardOutput,
    rho: Vec<ScalarField>,
}

fn solve(cfg: &ExperimentConfig, coeffs: &Coefficients, u0: &VectorField) -> Result<Run, CliError> {
    let ctx = || format!("convergence run (kappa_bar = {:e})", coeffs.kappa_bar);
    let out = picard_solve(coeffs, u0, cfg.t_final, cfg.steps(), &cfg.tolerances.picard, cfg.route).context(ctx)?;
    let eul = pushforward_solution(&out.trajectory, &out.flow, &coeffs.rho0, cfg.mu_bar, cfg.convergence.pushforward_stride)
        .context(ctx)?;
    Ok(Run { out, rho: eul.rho })
}

fn compare(base: &Run, run: &Run, mu_bar: f64, p: f64) -> Result<(f64, f64), CliError> {
    let ctx = || "trajectory difference".to_string();
    let diff = run.out.trajectory.difference(&base.out.trajectory).context(ctx)?;
    let diff = pushforward_inverse_rescale(&diff, mu_bar).context(ctx)?;
    let e = energy_norm(&diff, p).context(ctx)?.value;
    let part = DyadicPartition::new(base.rho[0].grid());
    let params = BesovParams::sum(2.0 / p, p);
    let mut d: f64 = 0.0;
    for (a, b) in run.rho.iter().zip(&base.rho) {
        d = d.max(part.besov_norm(&a.axpy(-1.0, b), params).context(ctx)?);
    }
    Ok((e, d))
}

pub fn convergence_study(cfg: &ExperimentConfig) -> Result<ConvergenceStudy, CliError> {
    cfg.validate_sweep(3)?;
    let grid = cfg.make_grid()?;
    let coeffs = cfg.coefficients(&grid, 0.0)?;
    let u0 = cfg.velocity(&grid)?;
    let p = cfg.tolerances.picard.p;
    let base = solve(cfg, &coeffs, &u0)?;
    let points = run_sweep(&cfg.sweep, |k| {
        let result = solve(cfg, &coeffs.with_kappa_bar(k), &u0).and_then(|r| {
            let (e, d) = compare(&base, &r, cfg.mu_bar, p)?;
            Ok((r.out.iterations, r.out.converged, e, d))
        });
        match result {
            Ok((it, conv, e, d)) => ConvergencePoint {
                kappa_bar: k,
                e_diff: Some(e),
                density_diff: Some(d),
                iterations: Some(it),
                converged: Some(conv),
                error: None,
            },
            Err(err) => ConvergencePoint {
                kappa_bar: k,
                e_diff: None,
                density_diff: None,
                iterations: None,
                converged: None,
                error: Some(err.to_string()),
            },
        }
    });
    let pick = |f: fn(&ConvergencePoint) -> Option<f64>| -> Result<Option<FitResult>, CliError> {
        let pts: Vec<(f64, f64)> = points.iter().filter_map(|p| f(p).map(|v| (p.kappa_bar, v))).collect();
        if pts.len() >= 3 {
            fit_power_law(&pts).map(Some)
        } else {
            Ok(None)
        }
    };
    let e_fit = pick(|p| p.e_diff)?;
    let density_fit = pick(|p| p.density_diff)?;
    let alpha_targets = cfg
        .alpha_targets
        .iter()
        .map(|&alpha| {
            let density_target = (3.0 * alpha - 1.0) / 2.0;
            AlphaCheck {
                alpha,
                velocity_target: alpha,
                density_target,
                velocity_gap: e_fit.as_ref().map(|f| f.slope - alpha),
                density_gap: density_fit.as_ref().map(|f| f.slope - density_target),
            }
        })
        .collect();
    Ok(ConvergenceStudy { baseline_iterations: base.out.iterations, points, e_fit, density_fit, alpha_targets })
}

pub fn write(study: &ConvergenceStudy, sink: &mut Sink) -> Result<(), CliError> {
    let rows: Vec<Vec<String>> = study
        .points
        .iter()
        .map(|p| {
            vec![
                num(p.kappa_bar),
                opt_num(p.e_diff),
                opt_num(p.density_diff),
                p.iterations.map(|i| i.to_string()).unwrap_or_default(),
                p.converged.map(|c| c.to_string()).unwrap_or_default(),
                p.error.clone().unwrap_or_default(),
            ]
        })
        .collect();
    sink.csv("convergence.csv", &["kappa_bar", "e_diff", "density_diff", "iterations", "converged", "error"], &rows)?;
    sink.json("convergence.json", study)?;
    Ok(())
}
