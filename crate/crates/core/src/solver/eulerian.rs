//! Direct Eulerian solver for
//! `ρ(∂_t u + u·∇u) − div(μ(ρ)D(u)) + ∇P = −κ div(k(ρ)∇ρ⊗∇ρ)`,
//! `∂_t ρ + div(ρu) = 0`, `div u = 0`, in the unit-viscosity frame.

use crate::coefficients::Coefficients;
use crate::error::{Error, Result};
use crate::field::{Field, ScalarField, VectorField};
use crate::lagrangian::{capillary_tensor, dealiased_divergence, divide_by_density};
use crate::ops;
use crate::pointwise as pw;
use crate::TensorField;

use super::free::rescaled_mesh;
use super::rescale::pushforward_inverse_rescale;
use super::stokes::{stokes_step, StepOptions, StokesMode, StokesState, TimeOrder};
use super::trajectory::{Frame, Scaling, Trajectory};

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct EulerianConfig {
    pub order: TimeOrder,
    /// Number of times a rejected step may be halved.
    pub max_halvings: u32,
}

impl Default for EulerianConfig {
    fn default() -> Self {
        EulerianConfig { order: TimeOrder::First, max_halvings: 6 }
    }
}

#[derive(Clone, Debug)]
pub struct EulerianRun {
    /// Velocity and pressure gradient in the original frame.
    pub trajectory: Trajectory,
    pub rho: Vec<ScalarField>,
    /// `∫ρ` at every stored time.
    pub mass: Vec<f64>,
    pub rho_min: f64,
    pub rho_max: f64,
    /// Number of step halvings that were needed.
    pub halvings: u32,
}

/// `−κ(1/ρ)div[k(ρ)∇ρ⊗∇ρ]`, dealiased; exactly zero when `κ = 0` or `∇ρ = 0`.
pub fn eulerian_capillary_force(coeffs: &Coefficients, rho: &ScalarField) -> VectorField {
    let grid = rho.grid();
    let grad = ops::gradient(rho);
    if coeffs.kappa() == 0.0 || grad.is_exactly_zero() {
        return VectorField::zeros(grid).to_spectral();
    }
    let t = capillary_tensor(rho, &grad.to_physical(), &TensorField::identity(grid), &coeffs.k_fn);
    divide_by_density(&dealiased_divergence(&t), rho).scale(-coeffs.kappa())
}

/// Solves on `[0, T]` with `steps` uniform steps (`T`, `u0` in the original
/// frame). Rejected steps restart the whole run with half the step.
pub fn eulerian_reference_solve(
    coeffs: &Coefficients,
    u0: &VectorField,
    t_final: f64,
    steps: usize,
    config: &EulerianConfig,
) -> Result<EulerianRun> {
    let d = ops::divergence(u0).norm_l2();
    if d > super::free::SOLENOIDAL_TOL * u0.norm_l2().max(1.0) {
        return Err(Error::NonSolenoidal(d));
    }
    crate::lagrangian::check_density(&coeffs.rho0, coeffs.rho_floor)?;
    let mut refine = 1usize;
    for halvings in 0..=config.max_halvings {
        match run(coeffs, u0, t_final, steps * refine, refine, config) {
            Ok(mut r) => {
                r.halvings = halvings;
                return Ok(r);
            }
            Err(Error::StepRejected { .. }) if halvings < config.max_halvings => refine *= 2,
            Err(e) => return Err(e),
        }
    }
    unreachable!()
}

fn run(
    coeffs: &Coefficients,
    u0: &VectorField,
    t_final: f64,
    steps: usize,
    store_every: usize,
    config: &EulerianConfig,
) -> Result<EulerianRun> {
    let times = rescaled_mesh(coeffs.mu_bar, t_final, steps)?;
    let dt = times[1] - times[0];
    let grid = u0.grid().clone();
    let zero = ScalarField::zeros_spectral(&grid);
    let (lo, hi) = (coeffs.rho_floor / 2.0, 2.0 * coeffs.rho0.max());
    let mut rho = coeffs.rho0.to_spectral();
    let mut state = StokesState::at_rest(u0.scale(1.0 / coeffs.mu_bar));
    let mut out_t = vec![0.0];
    let mut out_u = vec![state.u.clone()];
    let mut out_p = vec![];
    let mut out_rho = vec![rho.clone()];
    let (mut rmin, mut rmax) = (rho.min(), rho.max());
    // Previous explicit data for the second-order variant.
    let mut prev: Option<(VectorField, VectorField, ScalarField)> = None;
    for k in 1..times.len() {
        let f = momentum_forcing(coeffs, &state.u, &rho);
        let second = config.order == TimeOrder::Second;
        let (f_star, z_star, r_star) = match (&prev, second) {
            (Some((fp, up, rp)), true) => (
                f.scale(1.5).axpy(-0.5, fp),
                state.u.scale(1.5).axpy(-0.5, up),
                rho.scale(1.5).axpy(-0.5, rp),
            ),
            _ => (f.clone(), state.u.clone(), rho.clone()),
        };
        let r_phys = r_star.to_physical();
        let a = r_phys.map_physical(|r| 1.0 / r);
        let b = coeffs.mu_fn.eval_field(&r_phys);
        let opts = StepOptions {
            order: config.order,
            remainder_source: Some(&z_star),
            time: times[k],
            ..Default::default()
        };
        let next = stokes_step(&state, dt, &f_star, &zero, StokesMode::Variable { a: &a, b: &b }, &opts)?;
        // Heun on the conservative transport.
        let flux = |u: &VectorField, r: &ScalarField| {
            let ru = u.map_components(|c| c.mul_dealiased(r));
            ops::divergence(&ru)
        };
        let k1 = flux(&state.u, &rho);
        let pred = rho.axpy(-dt, &k1);
        let k2 = flux(&next.u, &pred);
        let new_rho = rho.axpy(-0.5 * dt, &k1.axpy(1.0, &k2));
        let (mn, mx) = (new_rho.min(), new_rho.max());
        if !(mn >= lo && mx <= hi) {
            return Err(Error::DensityBoundViolated { time: times[k] / coeffs.mu_bar, min: mn, max: mx, lo, hi });
        }
        rmin = rmin.min(mn);
        rmax = rmax.max(mx);
        prev = Some((f, state.u.clone(), rho));
        rho = new_rho;
        state = next;
        if k % store_every == 0 {
            out_t.push(times[k]);
            out_u.push(state.u.clone());
            out_p.push(state.grad_p.clone());
            out_rho.push(rho.clone());
        }
    }
    out_p.insert(0, out_p.first().cloned().unwrap_or_else(|| VectorField::zeros(&grid).to_spectral()));
    let traj = Trajectory::new(out_t, out_u, out_p, Frame::Eulerian, Scaling::UnitViscosity)?;
    let trajectory = pushforward_inverse_rescale(&traj, coeffs.mu_bar)?;
    let mass = out_rho.iter().map(ScalarField::integral).collect();
    Ok(EulerianRun { trajectory, rho: out_rho, mass, rho_min: rmin, rho_max: rmax, halvings: 0 })
}

/// `−u·∇u + capillary force`, dealiased.
fn momentum_forcing(coeffs: &Coefficients, u: &VectorField, rho: &ScalarField) -> VectorField {
    let du = ops::jacobian(u).to_physical();
    let up = u.to_physical();
    let dv = pw::TensorValues::of(&du);
    let uv = pw::VectorValues::of(&up);
    // (u·∇u)_i = Σ_j u_j ∂_j u_i = (Dz·u)_i
    let adv = pw::vector_from_fn(u.grid(), |i| {
        let a = pw::apply(&dv.at(i), uv.at(i));
        [-a[0], -a[1]]
    })
    .dealias();
    adv.axpy(1.0, &eulerian_capillary_force(coeffs, rho))
}
