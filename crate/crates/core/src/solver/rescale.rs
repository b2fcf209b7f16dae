use crate::error::{Error, Result};
use crate::field::Field;

use super::trajectory::{Scaling, Trajectory};

/// `ũ(t̃) = u(t̃/μ̄)/μ̄`, `∇P̃ = ∇P/μ̄²`: a sample at time `t` moves to `μ̄t`.
pub fn rescale_to_unit_viscosity(state: &Trajectory, mu_bar: f64) -> Result<Trajectory> {
    check(mu_bar)?;
    if state.scaling != Scaling::Original {
        return Err(Error::InvalidArgument("trajectory is already in unit-viscosity scaling".into()));
    }
    Ok(transform(state, mu_bar, 1.0 / mu_bar, Scaling::UnitViscosity))
}

/// `u(t) = μ̄ũ(μ̄t)`, `∇P = μ̄²∇P̃`: a sample at `t̃` moves to `t̃/μ̄`.
pub fn pushforward_inverse_rescale(state: &Trajectory, mu_bar: f64) -> Result<Trajectory> {
    check(mu_bar)?;
    if state.scaling != Scaling::UnitViscosity {
        return Err(Error::InvalidArgument("trajectory is already in original scaling".into()));
    }
    Ok(transform(state, 1.0 / mu_bar, mu_bar, Scaling::Original))
}

fn check(mu_bar: f64) -> Result<()> {
    if !(mu_bar > 0.0 && mu_bar.is_finite()) {
        return Err(Error::InvalidArgument(format!("mu_bar = {mu_bar} must be positive")));
    }
    Ok(())
}

fn transform(state: &Trajectory, time_factor: f64, amp: f64, scaling: Scaling) -> Trajectory {
    Trajectory {
        times: state.times.iter().map(|t| t * time_factor).collect(),
        u: state.u.iter().map(|u| u.scale(amp)).collect(),
        grad_p: state.grad_p.iter().map(|g| g.scale(amp * amp)).collect(),
        frame: state.frame,
        scaling,
    }
}
