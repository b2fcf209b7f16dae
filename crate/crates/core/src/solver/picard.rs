//! The Lagrangian fixed point.
//!
//! An iterate `(v̄, ∇Q̄)` is a velocity/pressure trajectory on the label
//! mesh. One outer iteration builds the flow `X_v̄`, checks the smallness
//! condition on `∫‖Dv̄‖`, then solves the linear system with forcing frozen
//! at the iterate (`inner_iterations` times at the same flow) and
//! substitutes the result. With `split`, the unknown is `ū = u_L + ũ` and
//! only `ũ` is solved for, against the difference capillary term.
//!
//! The time discretization is backward Euler with the forcing evaluated at
//! the new time, so a fixed point solves the backward-Euler discretization
//! of the Lagrangian system exactly (see [`fixed_point_residuals`]).

use serde::{Deserialize, Serialize};

use crate::besov::{BesovParams, DyadicPartition};
use crate::coefficients::Coefficients;
use crate::error::{Error, Result};
use crate::field::{Field, ScalarField, VectorField};
use crate::lagrangian::{build_flow, divergence_constraint_term, smallness_check, transformed_divergence, FlowMap, JacobianData};
use crate::ops;

use super::energy::energy_norm;
use super::forcing::{assemble_forcings, ForcingRequest, Scheme};
use super::free::{free_solution_stepped, rescaled_mesh, FreeMode};
use super::stokes::{stokes_step, variable_remainder, StepOptions, StokesMode, StokesState};
use super::trajectory::{Frame, Scaling, Trajectory};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// Variable-coefficient Stokes operator, `F`-terms (and `G³` when split).
    #[default]
    General,
    /// Constant-coefficient Stokes operator, `H`-terms; needs `ρ₀` close to 1.
    SmallDensity,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PicardConfig {
    /// Relative `E`-distance between successive iterates at which to stop.
    pub tol: f64,
    pub max_iters: usize,
    /// Bound on `∫₀ᵀ‖Dv̄‖_{Ḃ^{2/p}_{p,1}}`.
    pub epsilon0: f64,
    pub p: f64,
    /// Bound on `‖ρ₀ − 1‖_{Ḃ^{2/p}_{p,1}}` for the small-density route.
    pub density_smallness: f64,
    /// Solve for `ū − u_L` against the difference capillary term.
    pub split: bool,
    /// Linear solves per flow update.
    pub inner_iterations: usize,
    /// Divergence tolerance of each Stokes step.
    pub stepper_tol: f64,
    /// Relative tolerance of the implicit remainder sweeps (general route).
    pub sweep_tol: f64,
}

impl Default for PicardConfig {
    fn default() -> Self {
        PicardConfig {
            tol: 1e-10,
            max_iters: 30,
            epsilon0: 0.1,
            p: 2.0,
            density_smallness: 1.0,
            split: true,
            inner_iterations: 1,
            stepper_tol: 1e-9,
            sweep_tol: 1e-13,
        }
    }
}

/// One line of the contraction log.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ContractionEntry {
    pub iteration: usize,
    /// `‖(ū^{m+1} − ū^m, ∇P̄^{m+1} − ∇P̄^m)‖_{E_T}`.
    pub distance: f64,
    /// `distance / ‖ū^{m+1}‖_{E_T}`.
    pub relative: f64,
    /// `distance_m / distance_{m−1}`.
    pub ratio: Option<f64>,
    /// `∫‖Dv̄‖` of the iterate the step started from.
    pub smallness: f64,
}

#[derive(Clone, Debug)]
pub struct PicardOutput {
    /// Lagrangian, unit-viscosity `(ū, ∇P̄)`.
    pub trajectory: Trajectory,
    /// Flow of the returned velocity.
    pub flow: FlowMap,
    /// The stepped free solution when the run was split.
    pub free: Option<Trajectory>,
    pub iterations: usize,
    pub contraction_log: Vec<ContractionEntry>,
    pub converged: bool,
}

/// Runs the fixed point on `[0, T]` with `steps` uniform steps; `u0` and
/// `T` are in the original frame.
pub fn picard_solve(
    coeffs: &Coefficients,
    u0: &VectorField,
    t_final: f64,
    steps: usize,
    config: &PicardConfig,
    route: Route,
) -> Result<PicardOutput> {
    let times = rescaled_mesh(coeffs.mu_bar, t_final, steps)?;
    let u0 = u0.scale(1.0 / coeffs.mu_bar).to_spectral();
    let grid = u0.grid().clone();
    if route == Route::SmallDensity {
        let part = DyadicPartition::new(&grid);
        let dev = coeffs.rho0.map_physical(|r| r - 1.0);
        let norm = part.besov_norm(&dev, BesovParams::sum(2.0 / config.p, config.p))?;
        if norm > config.density_smallness {
            return Err(Error::DensityNotSmall { norm, limit: config.density_smallness });
        }
    }
    let free = if config.split {
        let mode = match route {
            Route::General => FreeMode::Variable,
            Route::SmallDensity => FreeMode::Constant,
        };
        Some(free_solution_stepped(coeffs, &u0, &times, mode, config.sweep_tol)?)
    } else {
        None
    };
    let mut current = match &free {
        Some(f) => f.clone(),
        None => {
            let zero = VectorField::zeros(&grid).to_spectral();
            let mut u = vec![zero.clone(); times.len()];
            u[0] = u0.clone();
            Trajectory::new(times.clone(), u, vec![zero; times.len()], Frame::Lagrangian, Scaling::UnitViscosity)?
        }
    };
    let solver = Solver::new(coeffs, route, config, free.as_ref())?;
    let mut log: Vec<ContractionEntry> = Vec::new();
    let mut bad = Vec::new();
    let mut converged = false;
    for m in 1..=config.max_iters.max(1) {
        let small = smallness_check(&times, &current.u, config.epsilon0, config.p)?;
        if let Some(t) = small.exceeded_at {
            return Err(Error::EpsilonExceeded { time: t / coeffs.mu_bar, value: small.integral, epsilon0: config.epsilon0 });
        }
        let flow = build_flow(&times, &current.u)?;
        let mut next = current.clone();
        for _ in 0..config.inner_iterations.max(1) {
            next = solver.psi(&flow, &next)?;
        }
        let delta = energy_norm(&next.difference(&current)?, config.p)?.value;
        let size = energy_norm(&next, config.p)?.value;
        let ratio = log.last().and_then(|e| (e.distance > 0.0).then(|| delta / e.distance));
        log.push(ContractionEntry {
            iteration: m,
            distance: delta,
            relative: if size > 0.0 { delta / size } else { 0.0 },
            ratio,
            smallness: small.integral,
        });
        current = next;
        if delta == 0.0 || delta <= config.tol * size {
            converged = true;
            break;
        }
        match ratio {
            Some(r) if r >= 1.0 => {
                bad.push(r);
                if bad.len() >= 3 {
                    return Err(Error::NoContraction { ratios: bad });
                }
            }
            _ => bad.clear(),
        }
    }
    let flow = build_flow(&times, &current.u)?;
    Ok(PicardOutput { trajectory: current, flow, free, iterations: log.len(), contraction_log: log, converged })
}

/// Data that stays fixed across iterations.
struct Solver<'a> {
    coeffs: &'a Coefficients,
    route: Route,
    config: &'a PicardConfig,
    free: Option<&'a Trajectory>,
    a: ScalarField,
    b: ScalarField,
}

impl<'a> Solver<'a> {
    fn new(coeffs: &'a Coefficients, route: Route, config: &'a PicardConfig, free: Option<&'a Trajectory>) -> Result<Self> {
        crate::lagrangian::check_density(&coeffs.rho0, coeffs.rho_floor)?;
        Ok(Solver {
            coeffs,
            route,
            config,
            free,
            a: coeffs.rho0.map_physical(|r| 1.0 / r),
            b: coeffs.mu_fn.eval_field(&coeffs.rho0),
        })
    }

    fn scheme(&self) -> Scheme {
        match (self.route, self.free.is_some()) {
            (Route::General, false) => Scheme::Aux2F,
            (Route::General, true) => Scheme::Aux3G,
            (Route::SmallDensity, false) => Scheme::Aux4H,
            (Route::SmallDensity, true) => Scheme::Aux6Outer,
        }
    }

    /// One linear solve at frozen flow and frozen `(w̄, ∇Q̄) = iterate`.
    fn psi(&self, flow: &FlowMap, it: &Trajectory) -> Result<Trajectory> {
        let times = &it.times;
        let dt = it.dt();
        let grid = it.u[0].grid().clone();
        let zero = VectorField::zeros(&grid).to_spectral();
        let shift = |k: usize| self.free.map(|f| (&f.u[k], &f.grad_p[k]));
        // The solved-for part starts from 0 when split, from ũ₀ otherwise.
        let start = match self.free {
            Some(_) => zero.clone(),
            None => it.u[0].clone(),
        };
        let mut state = StokesState::at_rest(start);
        let mut u = vec![it.u[0].clone()];
        let mut p: Vec<VectorField> = Vec::with_capacity(times.len());
        for k in 1..times.len() {
            let jac = JacobianData::from_displacement(flow.displacement(k), times[k])?;
            let req = ForcingRequest {
                scheme: self.scheme(),
                coeffs: self.coeffs,
                jac: &jac,
                w: &it.u[k],
                w_prev: Some(&it.u[k - 1]),
                dt,
                grad_q: &it.grad_p[k],
                baseline: None,
            };
            let forcing = assemble_forcings(&req)?.total();
            let div_m = divergence_constraint_term(&it.u[k], &jac)?.div_m;
            let opts = StepOptions { time: times[k], divergence_tol: self.config.stepper_tol, ..Default::default() };
            let (next, grad_p) = match self.route {
                Route::SmallDensity => {
                    let next = stokes_step(&state, dt, &forcing, &div_m, StokesMode::Constant, &opts)?;
                    // The step eliminates Δ, not div D; the gap is ∇div u.
                    let g = next.grad_p.axpy(1.0, &ops::gradient(&div_m));
                    (next, g)
                }
                Route::General => {
                    let z = match shift(k) {
                        Some((ul, _)) => it.u[k].axpy(-1.0, ul),
                        None => it.u[k].clone(),
                    };
                    let o = StepOptions { remainder_source: Some(&z), pressure_tol: 1e-13, ..opts };
                    let mode = StokesMode::Variable { a: &self.a, b: &self.b };
                    let next = stokes_step(&state, dt, &forcing, &div_m, mode, &o)?;
                    let g = next.grad_p.clone();
                    (next, g)
                }
            };
            let (full_u, full_p) = match shift(k) {
                Some((ul, pl)) => (next.u.axpy(1.0, ul), grad_p.axpy(1.0, pl)),
                None => (next.u.clone(), grad_p),
            };
            u.push(full_u);
            p.push(full_p);
            state = next;
        }
        p.insert(0, p.first().cloned().unwrap_or(zero));
        Trajectory::new(times.clone(), u, p, Frame::Lagrangian, Scaling::UnitViscosity)
    }
}

/// How well a trajectory solves the discrete Lagrangian system.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FixedPointResiduals {
    /// `Σ_k dt‖r^k‖₂` of the momentum residual in the route's form.
    pub momentum: f64,
    /// `max_k ‖div(adj(DX)ū^k)‖₂`.
    pub divergence: f64,
    /// `max_k ‖J^k − 1‖_∞`.
    pub volume: f64,
}

/// Substitutes `(ū, ∇P̄)` and its own flow into the backward-Euler
/// Lagrangian system.
///
/// Small-density form: `r = ∂_t ū − div D(ū) + ∇P̄ − (H¹ + H² + H³ + H⁴)`.
/// General form: `r = ∂_t ū − (1/ρ₀)div(μ(ρ₀)D(ū)) + (1/ρ₀)∇P̄ − (F¹ + F² + F³)`.
/// Both are the Lagrangian momentum equation rearranged (the general one
/// divided by `ρ₀`).
pub fn fixed_point_residuals(coeffs: &Coefficients, traj: &Trajectory, route: Route) -> Result<FixedPointResiduals> {
    let flow = build_flow(&traj.times, &traj.u)?;
    let dt = traj.dt();
    let a = coeffs.rho0.map_physical(|r| 1.0 / r);
    let b = coeffs.mu_fn.eval_field(&coeffs.rho0);
    let mut momentum = 0.0;
    let jac0 = JacobianData::from_displacement(flow.displacement(0), traj.times[0])?;
    let mut divergence = transformed_divergence(&traj.u[0], &jac0);
    let mut volume = jac0.volume_defect();
    for k in 1..traj.len() {
        let jac = JacobianData::from_displacement(flow.displacement(k), traj.times[k])?;
        divergence = divergence.max(transformed_divergence(&traj.u[k], &jac));
        volume = volume.max(jac.volume_defect());
        let (uk, gk) = (traj.u[k].to_spectral(), &traj.grad_p[k]);
        let scheme = match route {
            Route::General => Scheme::Aux2F,
            Route::SmallDensity => Scheme::Aux4H,
        };
        let req = ForcingRequest {
            scheme,
            coeffs,
            jac: &jac,
            w: &uk,
            w_prev: Some(&traj.u[k - 1]),
            dt,
            grad_q: gk,
            baseline: None,
        };
        let forcing = assemble_forcings(&req)?.total();
        let dtu = uk.axpy(-1.0, &traj.u[k - 1]).scale(1.0 / dt);
        let r = match route {
            Route::SmallDensity => {
                let visc = ops::tensor_divergence(&ops::sym_double_gradient(&uk));
                dtu.axpy(-1.0, &visc).axpy(1.0, gk)
            }
            Route::General => {
                let visc = variable_remainder(&uk, &a, &b).axpy(1.0, &ops::laplacian(&uk));
                let grad = gk.map_components(|c| c.mul_dealiased(&a));
                dtu.axpy(-1.0, &visc).axpy(1.0, &grad)
            }
        };
        momentum += dt * r.axpy(-1.0, &forcing).norm_l2();
    }
    Ok(FixedPointResiduals { momentum, divergence, volume })
}
