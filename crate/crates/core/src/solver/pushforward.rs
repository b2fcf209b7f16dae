//! Back to Eulerian variables: `(ρ, u, ∇P) = (ρ₀, ū, ᵗA∇P̄)∘X^{-1}`,
//! then the inverse viscosity rescaling.

use crate::error::{Error, Result};
use crate::field::{Field, ScalarField, VectorField};
use crate::lagrangian::{inverse_points, sample_at, FlowMap, JacobianData};
use crate::pointwise::{self as pw, TensorValues, VectorValues};

use super::rescale::pushforward_inverse_rescale;
use super::trajectory::{thinned_indices, Frame, Trajectory};

#[derive(Clone, Debug)]
pub struct EulerianState {
    /// Eulerian velocity and pressure gradient, original frame.
    pub trajectory: Trajectory,
    /// `ρ₀∘X^{-1}` at the same times.
    pub rho: Vec<ScalarField>,
}

/// Pushes every `stride`-th sample of a unit-viscosity Lagrangian
/// trajectory forward along `flow` (defined on the same mesh).
pub fn pushforward_solution(
    lagr: &Trajectory,
    flow: &FlowMap,
    rho0: &ScalarField,
    mu_bar: f64,
    stride: usize,
) -> Result<EulerianState> {
    if lagr.frame != Frame::Lagrangian {
        return Err(Error::InvalidArgument("pushforward expects a Lagrangian trajectory".into()));
    }
    if flow.len() != lagr.len() {
        return Err(Error::LengthMismatch { expected: lagr.len(), got: flow.len() });
    }
    let idx = thinned_indices(lagr.len(), stride);
    let mut times = Vec::with_capacity(idx.len());
    let (mut u, mut gp, mut rho) = (Vec::new(), Vec::new(), Vec::new());
    for &k in &idx {
        let t = lagr.times[k];
        if (flow.times()[k] - t).abs() > 1e-12 * t.abs().max(1.0) {
            return Err(Error::TimeNotOnMesh(t));
        }
        let d = flow.displacement(k);
        let jac = JacobianData::from_displacement(d, t)?;
        let pts = inverse_points(d, t)?;
        u.push(sample_at(&lagr.u[k], &pts));
        gp.push(sample_at(&eulerian_gradient(&jac, &lagr.grad_p[k]), &pts));
        rho.push(sample_at(rho0, &pts));
        times.push(t);
    }
    let traj = Trajectory::new(times, u, gp, Frame::Eulerian, lagr.scaling)?;
    Ok(EulerianState { trajectory: pushforward_inverse_rescale(&traj, mu_bar)?, rho })
}

/// `ᵗA∇_yP̄`, the spatial gradient expressed on labels.
fn eulerian_gradient(jac: &JacobianData, grad: &VectorField) -> VectorField {
    let g = grad.to_physical();
    let gv = VectorValues::of(&g);
    let av = TensorValues::of(&jac.a);
    pw::vector_from_fn(jac.grid(), |i| pw::apply(&pw::transpose(&av.at(i)), gv.at(i)))
}
