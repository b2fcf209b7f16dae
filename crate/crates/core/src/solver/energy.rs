use serde::Serialize;

use crate::besov::{uniform_step, BesovParams, DyadicPartition};
use crate::error::Result;
use crate::field::Field;
use crate::ops;

use super::trajectory::Trajectory;

/// The four pieces of `‖(u, ∇P)‖_{E_T}` at regularity `s = 2/p − 1`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct EnergyParts {
    pub linf_u: f64,
    pub l1_dtu: f64,
    pub l1_lap_u: f64,
    pub l1_grad_p: f64,
}

impl EnergyParts {
    pub fn total(&self) -> f64 {
        self.linf_u + self.l1_dtu + self.l1_lap_u + self.l1_grad_p
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EnergyNorm {
    pub value: f64,
    pub parts: EnergyParts,
}

/// Per-sample Besov norms of `u`, `∂_t u`, `∇²u` and `∇P`.
pub(crate) fn sample_norms(traj: &Trajectory, p: f64) -> Result<Vec<[f64; 4]>> {
    let grid = traj.u[0].grid().clone();
    let part = DyadicPartition::new(&grid);
    let params = BesovParams::sum(2.0 / p - 1.0, p);
    let dtu = traj.time_derivative();
    (0..traj.len())
        .map(|k| {
            Ok([
                part.besov_norm(&traj.u[k], params)?,
                part.besov_norm(&dtu[k], params)?,
                part.besov_norm(&ops::hessian(&traj.u[k]), params)?,
                part.besov_norm(&traj.grad_p[k], params)?,
            ])
        })
        .collect()
}

/// `E_t` parts accumulated up to every stored time.
pub fn running_energy_parts(traj: &Trajectory, p: f64) -> Result<Vec<EnergyParts>> {
    let dt = uniform_step(&traj.times)?;
    let norms = sample_norms(traj, p)?;
    let mut out = Vec::with_capacity(norms.len());
    let mut acc = EnergyParts { linf_u: norms[0][0], ..Default::default() };
    out.push(acc);
    for k in 1..norms.len() {
        let (a, b) = (norms[k - 1], norms[k]);
        acc.linf_u = acc.linf_u.max(b[0]);
        acc.l1_dtu += 0.5 * dt * (a[1] + b[1]);
        acc.l1_lap_u += 0.5 * dt * (a[2] + b[2]);
        acc.l1_grad_p += 0.5 * dt * (a[3] + b[3]);
        out.push(acc);
    }
    Ok(out)
}

/// `‖(u, ∇P)‖_{E_T}` over the whole trajectory.
pub fn energy_norm(traj: &Trajectory, p: f64) -> Result<EnergyNorm> {
    let parts = *running_energy_parts(traj, p)?.last().unwrap();
    Ok(EnergyNorm { value: parts.total(), parts })
}
