//! Exit time of the running free-solution aggregate
//! `‖(∂_t u, ∇²u, ∇P)‖_{L¹_t Ḃ^{2/p−1}_{p,1}} + ‖u‖_{L²_t Ḃ^{2/p}_{p,1}}`.

use crate::besov::{uniform_step, BesovParams, DyadicPartition};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::ops;

use super::free::FreeSolution;
use super::trajectory::Trajectory;

/// Per-sample integrands of the exit aggregate on a uniform mesh.
#[derive(Clone, Debug, PartialEq)]
pub struct ExitSamples {
    pub times: Vec<f64>,
    /// `‖∂_t u‖ + ‖∇²u‖ + ‖∇P‖` at regularity `2/p − 1`.
    pub l1_integrand: Vec<f64>,
    /// `‖u‖` at regularity `2/p` (squared inside the time integral).
    pub l2_integrand: Vec<f64>,
}

impl ExitSamples {
    pub fn new(times: Vec<f64>, l1_integrand: Vec<f64>, l2_integrand: Vec<f64>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::EmptyTrajectory);
        }
        if l1_integrand.len() != times.len() || l2_integrand.len() != times.len() {
            return Err(Error::LengthMismatch { expected: times.len(), got: l1_integrand.len().min(l2_integrand.len()) });
        }
        uniform_step(&times)?;
        Ok(ExitSamples { times, l1_integrand, l2_integrand })
    }

    /// From a stored trajectory, with backward-difference time derivatives.
    pub fn from_trajectory(traj: &Trajectory, p: f64) -> Result<Self> {
        let part = DyadicPartition::new(traj.u[0].grid());
        let low = BesovParams::sum(2.0 / p - 1.0, p);
        let high = BesovParams::sum(2.0 / p, p);
        let dtu = traj.time_derivative();
        let mut l1 = Vec::with_capacity(traj.len());
        let mut l2 = Vec::with_capacity(traj.len());
        for k in 0..traj.len() {
            let u = &traj.u[k];
            l1.push(
                part.besov_norm(&dtu[k], low)?
                    + part.besov_norm(&ops::hessian(u), low)?
                    + part.besov_norm(&traj.grad_p[k], low)?,
            );
            l2.push(part.besov_norm(u, high)?);
        }
        ExitSamples::new(traj.times.clone(), l1, l2)
    }

    /// From the closed-form free solution, exact in time.
    pub fn from_free(free: &FreeSolution, times: &[f64], p: f64) -> Result<Self> {
        let part = DyadicPartition::new(free.pressure_gradient().grid());
        let low = BesovParams::sum(2.0 / p - 1.0, p);
        let high = BesovParams::sum(2.0 / p, p);
        let gp = part.besov_norm(free.pressure_gradient(), low)?;
        let mut l1 = Vec::with_capacity(times.len());
        let mut l2 = Vec::with_capacity(times.len());
        for &t in times {
            let u = free.velocity(t)?;
            let dtu = free.time_derivative(t)?;
            l1.push(part.besov_norm(&dtu, low)? + part.besov_norm(&ops::hessian(&u), low)? + gp);
            l2.push(part.besov_norm(&u, high)?);
        }
        ExitSamples::new(times.to_vec(), l1, l2)
    }

    /// Running aggregate at every mesh time (trapezoid rule).
    pub fn running(&self) -> Vec<f64> {
        let dt = uniform_step(&self.times).unwrap_or(0.0);
        let (mut a1, mut a2) = (0.0, 0.0);
        let mut out = vec![0.0];
        for k in 1..self.times.len() {
            a1 += 0.5 * dt * (self.l1_integrand[k - 1] + self.l1_integrand[k]);
            a2 += 0.5 * dt * (self.l2_integrand[k - 1].powi(2) + self.l2_integrand[k].powi(2));
            out.push(a1 + a2.sqrt());
        }
        out
    }
}

/// First mesh time at which the running aggregate exceeds `ε/2`, or the
/// final time if it never does.
pub fn exit_time(samples: &ExitSamples, epsilon: f64) -> f64 {
    let run = samples.running();
    run.iter()
        .position(|&v| v > 0.5 * epsilon)
        .map(|k| samples.times[k])
        .unwrap_or(*samples.times.last().unwrap())
}
