//! One IMEX step of the (possibly variable-coefficient) Stokes problem
//!
//! `∂_t u − a div(b D(u)) + a∇P = f`, `div u = div M`,
//!
//! with the Laplacian implicit and `a div(b D(u)) − Δu` explicit. The
//! constant mode (`a = b = 1`, operator `Δ`) is solved exactly per mode.


use crate::error::{Error, Result};
use crate::field::{Field, ScalarField, TensorField, VectorField};
use crate::ops;

/// Degree of the time discretization of the viscous term.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeOrder {
    /// Backward Euler on the Laplacian.
    #[default]
    First,
    /// Crank-Nicolson on the Laplacian.
    Second,
}

impl TimeOrder {
    fn theta(self) -> f64 {
        match self {
            TimeOrder::First => 1.0,
            TimeOrder::Second => 0.5,
        }
    }
}

/// Velocity (spectral) with the pressure potential and its gradient.
#[derive(Clone, Debug)]
pub struct StokesState {
    pub u: VectorField,
    pub pressure: ScalarField,
    pub grad_p: VectorField,
}

impl StokesState {
    pub fn at_rest(u: VectorField) -> Self {
        let grid = u.grid().clone();
        StokesState {
            u: u.to_spectral(),
            pressure: ScalarField::zeros_spectral(&grid),
            grad_p: VectorField::zeros(&grid).to_spectral(),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub enum StokesMode<'a> {
    Constant,
    /// `a` multiplies the divergence and the pressure, `b` sits inside.
    Variable { a: &'a ScalarField, b: &'a ScalarField },
}

#[derive(Clone, Copy, Debug)]
pub struct StepOptions<'a> {
    pub order: TimeOrder,
    /// Field at which the explicit remainder is evaluated (default: `u^n`).
    pub remainder_source: Option<&'a VectorField>,
    /// Relative residual target of the variable-coefficient pressure solve.
    pub pressure_tol: f64,
    /// Admissible `‖div u − div M‖₂` after the step.
    pub divergence_tol: f64,
    /// Largest accepted ratio `‖u^{n+1}‖ / (‖u^n‖ + dt‖f + R‖)`.
    pub max_growth: f64,
    /// Time label for error messages.
    pub time: f64,
}

impl Default for StepOptions<'_> {
    fn default() -> Self {
        StepOptions {
            order: TimeOrder::First,
            remainder_source: None,
            pressure_tol: 1e-12,
            divergence_tol: 1e-9,
            max_growth: 2.0,
            time: 0.0,
        }
    }
}

/// `a·div(b·D(z)) − Δz`, dealiased.
pub fn variable_remainder(z: &VectorField, a: &ScalarField, b: &ScalarField) -> VectorField {
    let dz = ops::sym_double_gradient(z);
    let weighted = TensorField::from_components(dz.components().iter().map(|c| c.mul_dealiased(b)).collect());
    let div = ops::tensor_divergence(&weighted);
    let scaled = div.map_components(|c| c.mul_dealiased(a));
    scaled.axpy(-1.0, &ops::laplacian(&z.to_spectral()))
}

/// Mean-zero `P` with `div(dealias(a∇P)) = r`, by a preconditioned
/// fixed-point iteration around the midrange `ā` of `a`.
pub(crate) fn variable_poisson(
    a: &ScalarField,
    r: &ScalarField,
    warm: &ScalarField,
    tol: f64,
) -> Result<ScalarField> {
    let (lo, hi) = (a.min(), a.max());
    let abar = 0.5 * (lo + hi);
    let da = a.map_physical(|x| x - abar);
    let r = r.to_spectral();
    let scale = r.norm_l2().max(1e-300);
    let mut p = warm.to_spectral();
    let apply = |p: &ScalarField| -> ScalarField {
        let g = ops::gradient(p);
        let flux = g.map_components(|c| c.mul_dealiased(&da));
        ops::divergence(&flux)
    };
    let mut residual = f64::INFINITY;
    for _ in 0..200 {
        let lower = apply(&p);
        // div(a∇P) = ā ΔP + div((a − ā)∇P)
        let full = ops::laplacian(&p).scale(abar).axpy(1.0, &lower);
        residual = full.axpy(-1.0, &r).norm_l2() / scale;
        if residual <= tol || r.norm_l2() == 0.0 {
            return Ok(p);
        }
        p = ops::inverse_laplacian(&r.axpy(-1.0, &lower)).scale(1.0 / abar);
    }
    Err(Error::PressureSolve { residual })
}

/// Advances `state` by one step of size `dt`.
pub fn stokes_step(
    state: &StokesState,
    dt: f64,
    forcing: &VectorField,
    div_m: &ScalarField,
    mode: StokesMode<'_>,
    opts: &StepOptions<'_>,
) -> Result<StokesState> {
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("dt = {dt} must be positive")));
    }
    let theta = opts.order.theta();
    let u = state.u.to_spectral();
    let s = div_m.to_spectral();
    // g = u^n + dt(1−θ)Δu^n + dt(f + R)
    let mut explicit = forcing.to_spectral();
    if let StokesMode::Variable { a, b } = mode {
        let z = opts.remainder_source.unwrap_or(&u);
        explicit = explicit.axpy(1.0, &variable_remainder(z, a, b));
    }
    let mut g = u.axpy(dt, &explicit);
    if theta < 1.0 {
        g = g.axpy(dt * (1.0 - theta), &ops::laplacian(&u));
    }
    let implicit = |f: &VectorField| ops::radial_multiplier(f, |k2| 1.0 / (1.0 + theta * dt * k2));
    let helmholtz = |f: &ScalarField| ops::radial_multiplier(f, |k2| 1.0 + theta * dt * k2);
    let (new_u, pressure, grad_p) = match mode {
        StokesMode::Constant => {
            let (pg, qg) = ops::leray_project(&g);
            // The curl-free part is pinned by the constraint: Qu = ∇Δ^{-1}s.
            let phi = ops::inverse_laplacian(&s);
            let qu = ops::gradient(&phi);
            let new_u = implicit(&pg).axpy(1.0, &qu);
            // dt∇Π = Qg − (I − θdtΔ)Qu
            let div_qg = ops::divergence(&qg);
            let pressure = ops::inverse_laplacian(&div_qg).axpy(-1.0, &helmholtz(&phi)).scale(1.0 / dt);
            let grad_p = ops::gradient(&pressure);
            (new_u, pressure, grad_p)
        }
        StokesMode::Variable { a, .. } => {
            // div(a∇P) = [div g − (I − θdtΔ)s]/dt
            let rhs = ops::divergence(&g).axpy(-1.0, &helmholtz(&s)).scale(1.0 / dt);
            let pressure = variable_poisson(a, &rhs, &state.pressure, opts.pressure_tol)?;
            let grad_p = ops::gradient(&pressure);
            let flux = grad_p.map_components(|c| c.mul_dealiased(a));
            let new_u = implicit(&g.axpy(-dt, &flux));
            (new_u, pressure, grad_p)
        }
    };
    let defect = ops::divergence(&new_u).axpy(-1.0, &s).norm_l2();
    if !(defect <= opts.divergence_tol) {
        return Err(Error::PressureSolve { residual: defect });
    }
    // The constraint part ∇Δ^{-1}div M is imposed, not grown.
    let imposed = ops::gradient(&ops::inverse_laplacian(&s)).norm_l2();
    let before = u.norm_l2() + dt * explicit.norm_l2() + imposed;
    let after = new_u.norm_l2();
    if !after.is_finite() || (before > 0.0 && after > opts.max_growth * before + 1e-300) {
        return Err(Error::StepRejected { time: opts.time, growth: after / before });
    }
    Ok(StokesState { u: new_u, pressure, grad_p })
}
