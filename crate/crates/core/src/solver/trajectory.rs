use serde::{Deserialize, Serialize};

use crate::besov::uniform_step;
use crate::error::{Error, Result};
use crate::field::{Field, VectorField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    Lagrangian,
    Eulerian,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scaling {
    Original,
    UnitViscosity,
}

/// Velocity and pressure gradient on a uniform time mesh.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub u: Vec<VectorField>,
    pub grad_p: Vec<VectorField>,
    pub frame: Frame,
    pub scaling: Scaling,
}

impl Trajectory {
    pub fn new(
        times: Vec<f64>,
        u: Vec<VectorField>,
        grad_p: Vec<VectorField>,
        frame: Frame,
        scaling: Scaling,
    ) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::EmptyTrajectory);
        }
        if u.len() != times.len() || grad_p.len() != times.len() {
            return Err(Error::InvalidArgument("one sample per time expected".into()));
        }
        uniform_step(&times)?;
        Ok(Trajectory { times, u, grad_p, frame, scaling })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dt(&self) -> f64 {
        uniform_step(&self.times).unwrap_or(0.0)
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// Sample-wise `self − other` (same mesh assumed).
    pub fn difference(&self, other: &Trajectory) -> Result<Trajectory> {
        if self.len() != other.len() {
            return Err(Error::InvalidArgument("trajectories have different meshes".into()));
        }
        let sub = |a: &[VectorField], b: &[VectorField]| {
            a.iter().zip(b).map(|(x, y)| x.axpy(-1.0, y)).collect::<Vec<_>>()
        };
        Ok(Trajectory {
            times: self.times.clone(),
            u: sub(&self.u, &other.u),
            grad_p: sub(&self.grad_p, &other.grad_p),
            frame: self.frame,
            scaling: self.scaling,
        })
    }

    /// Backward differences of `u`; the first sample uses the forward one.
    pub fn time_derivative(&self) -> Vec<VectorField> {
        let n = self.len();
        if n < 2 {
            return self.u.iter().map(|u| u.scale(0.0)).collect();
        }
        let dt = self.dt();
        (0..n)
            .map(|k| {
                let (a, b) = if k == 0 { (1, 0) } else { (k, k - 1) };
                self.u[a].axpy(-1.0, &self.u[b]).scale(1.0 / dt)
            })
            .collect()
    }

    pub fn to_physical(&self) -> Trajectory {
        Trajectory {
            times: self.times.clone(),
            u: self.u.iter().map(Field::to_physical).collect(),
            grad_p: self.grad_p.iter().map(Field::to_physical).collect(),
            frame: self.frame,
            scaling: self.scaling,
        }
    }

    /// Keeps every `stride`-th sample.
    pub fn thin(&self, stride: usize) -> Trajectory {
        let idx = thinned_indices(self.len(), stride);
        Trajectory {
            times: idx.iter().map(|&k| self.times[k]).collect(),
            u: idx.iter().map(|&k| self.u[k].clone()).collect(),
            grad_p: idx.iter().map(|&k| self.grad_p[k].clone()).collect(),
            frame: self.frame,
            scaling: self.scaling,
        }
    }
}

/// Indices `0, s, 2s, …` of a mesh with `len` samples.
pub(crate) fn thinned_indices(len: usize, stride: usize) -> Vec<usize> {
    let stride = stride.max(1);
    (0..len).step_by(stride).collect()
}
