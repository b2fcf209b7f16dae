//! The free solution `(u_L, ∇P_L)`: the linear system driven by the
//! initial velocity and the time-independent capillary force of `ρ₀`.
//!
//! Everything here lives in the unit-viscosity frame.

use num_complex::Complex64;

use crate::coefficients::Coefficients;
use crate::error::{Error, Result};
use crate::field::{Field, ScalarField, VectorField};
use crate::ops;

use super::forcing::free_capillary_forcing;
use super::stokes::{stokes_step, StepOptions, StokesMode, StokesState};
use super::trajectory::{Frame, Scaling, Trajectory};

/// Divergence tolerance on the initial velocity.
pub const SOLENOIDAL_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FreeMode {
    /// `∂_t u_L − Δu_L + ∇P_L = H⁴₀`, solved per mode in closed form.
    #[default]
    Constant,
    /// `∂_t u_L − (1/ρ₀)div(μ(ρ₀)D(u_L)) + (1/ρ₀)∇P_L = F³₀`, stepped.
    Variable,
}

/// Closed-form constant-coefficient free solution
/// `u_L(t) = e^{tΔ}ũ₀ + (I − e^{tΔ})(−Δ)^{-1}ℙH⁴₀`, `∇P_L = ℚH⁴₀`.
#[derive(Clone, Debug)]
pub struct FreeSolution {
    u0: VectorField,
    forcing_p: VectorField,
    grad_p: VectorField,
}

impl FreeSolution {
    /// `u0` is the unit-viscosity initial velocity `ũ₀ = u₀/μ̄`.
    pub fn new(coeffs: &Coefficients, u0: &VectorField) -> Result<Self> {
        check_solenoidal(u0)?;
        let h0 = free_capillary_forcing(coeffs)?;
        let (forcing_p, grad_p) = ops::leray_project(&h0);
        Ok(FreeSolution { u0: u0.to_spectral(), forcing_p, grad_p })
    }

    pub fn velocity(&self, t: f64) -> Result<VectorField> {
        self.weighted(t, |k2| (-t * k2).exp(), |k2| if k2 == 0.0 { t } else { -(-t * k2).exp_m1() / k2 })
    }

    /// Exact `∂_t u_L = Δe^{tΔ}ũ₀ + e^{tΔ}ℙH⁴₀`.
    pub fn time_derivative(&self, t: f64) -> Result<VectorField> {
        self.weighted(t, |k2| -k2 * (-t * k2).exp(), |k2| (-t * k2).exp())
    }

    pub fn pressure_gradient(&self) -> &VectorField {
        &self.grad_p
    }

    /// `t ↦ u_L(t)` is affine in the two spectral weights.
    fn weighted(&self, t: f64, on_u0: impl Fn(f64) -> f64, on_f: impl Fn(f64) -> f64) -> Result<VectorField> {
        if t < 0.0 {
            return Err(Error::NegativeTime(t));
        }
        let grid = self.u0.grid().clone();
        let comps = self
            .u0
            .components()
            .iter()
            .zip(self.forcing_p.components())
            .map(|(u, f)| {
                let (us, fs) = (u.spectral(), f.spectral());
                let c: Vec<Complex64> = (0..grid.len())
                    .map(|i| {
                        let k2 = grid.k_squared(i);
                        us[i] * on_u0(k2) + fs[i] * on_f(k2)
                    })
                    .collect();
                ScalarField::from_spectral(&grid, c).unwrap()
            })
            .collect();
        Ok(VectorField::from_components(comps))
    }

    /// Samples on `times`, tagged Lagrangian (labels and positions agree
    /// for a linear problem).
    pub fn sample(&self, times: &[f64]) -> Result<Trajectory> {
        let u = times.iter().map(|&t| self.velocity(t)).collect::<Result<Vec<_>>>()?;
        let p = vec![self.grad_p.clone(); times.len()];
        Trajectory::new(times.to_vec(), u, p, Frame::Lagrangian, Scaling::UnitViscosity)
    }
}

fn check_solenoidal(u0: &VectorField) -> Result<()> {
    let d = ops::divergence(u0).norm_l2();
    let scale = u0.norm_l2().max(1.0);
    if d > SOLENOIDAL_TOL * scale {
        return Err(Error::NonSolenoidal(d));
    }
    Ok(())
}

/// Unit-viscosity mesh `μ̄·(0, dt, …, T)` for a horizon `T` and step count
/// given in the original frame.
pub fn rescaled_mesh(mu_bar: f64, t_final: f64, steps: usize) -> Result<Vec<f64>> {
    if steps == 0 || !(t_final > 0.0) {
        return Err(Error::InvalidArgument("need T > 0 and at least one step".into()));
    }
    let dt = mu_bar * t_final / steps as f64;
    Ok((0..=steps).map(|k| k as f64 * dt).collect())
}

/// Free solution on the mesh of `times` (unit-viscosity frame).
///
/// `u0` is given in the original frame and rescaled here.
pub fn free_solution(coeffs: &Coefficients, u0: &VectorField, times: &[f64], mode: FreeMode) -> Result<Trajectory> {
    let u0 = u0.scale(1.0 / coeffs.mu_bar);
    match mode {
        FreeMode::Constant => FreeSolution::new(coeffs, &u0)?.sample(times),
        FreeMode::Variable => stepped(coeffs, &u0, times, mode, 1e-12),
    }
}

/// Backward-Euler free solution, the discrete counterpart used inside the
/// fixed-point iteration. `u0` is already in the unit-viscosity frame.
pub fn free_solution_stepped(
    coeffs: &Coefficients,
    u0: &VectorField,
    times: &[f64],
    mode: FreeMode,
    sweep_tol: f64,
) -> Result<Trajectory> {
    stepped(coeffs, u0, times, mode, sweep_tol)
}

/// Largest number of remainder sweeps per variable-coefficient step.
const MAX_SWEEPS: usize = 200;

fn stepped(coeffs: &Coefficients, u0: &VectorField, times: &[f64], mode: FreeMode, sweep_tol: f64) -> Result<Trajectory> {
    check_solenoidal(u0)?;
    let grid = u0.grid().clone();
    let dt = crate::besov::uniform_step(times)?;
    let h0 = free_capillary_forcing(coeffs)?;
    let zero = ScalarField::zeros_spectral(&grid);
    let (a, b) = (coeffs.rho0.map_physical(|r| 1.0 / r), coeffs.mu_fn.eval_field(&coeffs.rho0));
    let forcing = match mode {
        FreeMode::Constant => h0,
        FreeMode::Variable => crate::lagrangian::divide_by_density(&h0, &coeffs.rho0),
    };
    let mut state = StokesState::at_rest(u0.clone());
    let mut u = vec![state.u.clone()];
    let mut p = vec![];
    for k in 1..times.len() {
        let opts = StepOptions { time: times[k], ..Default::default() };
        state = match mode {
            FreeMode::Constant => stokes_step(&state, dt, &forcing, &zero, StokesMode::Constant, &opts)?,
            FreeMode::Variable => {
                let mode = StokesMode::Variable { a: &a, b: &b };
                implicit_sweeps(&state, dt, &forcing, &zero, mode, &opts, sweep_tol)?
            }
        };
        u.push(state.u.clone());
        p.push(state.grad_p.clone());
    }
    let first = p.first().cloned().unwrap_or_else(|| VectorField::zeros(&grid).to_spectral());
    p.insert(0, first);
    Trajectory::new(times.to_vec(), u, p, Frame::Lagrangian, Scaling::UnitViscosity)
}

/// Repeats a variable step with the remainder evaluated at the latest
/// iterate until it is a fixed point, which makes the step fully implicit.
pub(crate) fn implicit_sweeps(
    state: &StokesState,
    dt: f64,
    forcing: &VectorField,
    div_m: &ScalarField,
    mode: StokesMode<'_>,
    opts: &StepOptions<'_>,
    tol: f64,
) -> Result<StokesState> {
    let mut next = stokes_step(state, dt, forcing, div_m, mode, opts)?;
    let mut ratios = Vec::new();
    let mut last = f64::INFINITY;
    for _ in 0..MAX_SWEEPS {
        let o = StepOptions { remainder_source: Some(&next.u), ..*opts };
        let warm = StokesState { pressure: next.pressure.clone(), ..state.clone() };
        let cand = stokes_step(&warm, dt, forcing, div_m, mode, &o)?;
        let change = cand.u.axpy(-1.0, &next.u).norm_l2();
        let scale = cand.u.norm_l2().max(1e-300);
        next = cand;
        if change <= tol * scale || change == 0.0 {
            return Ok(next);
        }
        if change >= last {
            ratios.push(change / last);
            if ratios.len() >= 3 {
                return Err(Error::NoContraction { ratios });
            }
        } else {
            ratios.clear();
        }
        last = change;
    }
    Err(Error::NoContraction { ratios })
}
