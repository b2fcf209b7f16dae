//! Flow maps at fixed labels and the change-of-variables toolkit.

use crate::besov::{uniform_step, BesovParams, DyadicPartition};
use crate::coefficients::CoefficientFn;
use crate::error::{Error, Result};
use crate::field::{Field, ScalarField, TensorField, VectorField};
use crate::grid::Grid;
use crate::interp::FourierInterpolant;
use crate::ops;
use crate::pointwise::{self as pw, TensorValues, VectorValues, M2};

/// Smallest `|det DX|` accepted before the flow counts as degenerate.
pub const DET_FLOOR: f64 = 0.1;
/// Residual target of the inverse-flow iteration.
pub const INVERSE_TOL: f64 = 1e-10;
pub const INVERSE_MAX_ITERS: usize = 200;

/// `X(t, y) = y + d(t, y)` sampled on a uniform mesh, `d(t₀) = 0`.
#[derive(Clone, Debug)]
pub struct FlowMap {
    grid: Grid,
    times: Vec<f64>,
    displacement: Vec<VectorField>,
}

impl FlowMap {
    pub fn identity(grid: &Grid, times: &[f64]) -> Result<Self> {
        uniform_step(times)?;
        Ok(FlowMap {
            grid: grid.clone(),
            times: times.to_vec(),
            displacement: times.iter().map(|_| VectorField::zeros(grid)).collect(),
        })
    }

    /// Builds a flow from prescribed displacements (the first must vanish).
    pub fn from_displacements(times: &[f64], displacement: Vec<VectorField>) -> Result<Self> {
        uniform_step(times)?;
        if displacement.len() != times.len() {
            return Err(Error::InvalidArgument("one displacement per time sample expected".into()));
        }
        let grid = displacement[0].grid().clone();
        Ok(FlowMap { grid, times: times.to_vec(), displacement })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn displacement(&self, k: usize) -> &VectorField {
        &self.displacement[k]
    }

    /// Mesh index of `t`, to within a millionth of a step.
    pub fn index_of(&self, t: f64) -> Result<usize> {
        mesh_index(&self.times, t)
    }
}

pub(crate) fn mesh_index(times: &[f64], t: f64) -> Result<usize> {
    let dt = uniform_step(times)?;
    if dt == 0.0 {
        return if (t - times[0]).abs() <= 1e-12 { Ok(0) } else { Err(Error::TimeNotOnMesh(t)) };
    }
    let x = (t - times[0]) / dt;
    let k = x.round();
    if (x - k).abs() > 1e-6 || k < 0.0 || k as usize >= times.len() {
        return Err(Error::TimeNotOnMesh(t));
    }
    Ok(k as usize)
}

/// Running trapezoidal integral of the velocity at fixed labels.
pub fn build_flow(times: &[f64], velocity: &[VectorField]) -> Result<FlowMap> {
    let dt = uniform_step(times)?;
    if velocity.len() != times.len() {
        return Err(Error::InvalidArgument("one velocity per time sample expected".into()));
    }
    let grid = velocity[0].grid().clone();
    let mut displacement = Vec::with_capacity(times.len());
    let mut d = VectorField::zeros(&grid);
    displacement.push(d.clone());
    for w in velocity.windows(2) {
        d = d.axpy(0.5 * dt, &w[0].to_physical()).axpy(0.5 * dt, &w[1].to_physical());
        displacement.push(d.clone());
    }
    Ok(FlowMap { grid, times: times.to_vec(), displacement })
}

/// `DX`, its inverse `A`, the adjugate and `J = det DX`, all physical.
#[derive(Clone, Debug)]
pub struct JacobianData {
    pub dx: TensorField,
    pub a: TensorField,
    pub adj: TensorField,
    pub j: ScalarField,
}

impl JacobianData {
    pub fn identity(grid: &Grid) -> Self {
        JacobianData {
            dx: TensorField::identity(grid),
            a: TensorField::identity(grid),
            adj: TensorField::identity(grid),
            j: ScalarField::constant(grid, 1.0),
        }
    }

    /// Pointwise data of `X = y + d`; `time` only labels errors.
    pub fn from_displacement(d: &VectorField, time: f64) -> Result<Self> {
        let grid = d.grid().clone();
        let dd = ops::jacobian(d).to_physical();
        let ddv = TensorValues::of(&dd);
        let mut min_det = f64::INFINITY;
        let mut vals: Vec<(M2, M2, M2, f64)> = Vec::with_capacity(grid.len());
        for i in 0..grid.len() {
            let m = pw::add(&pw::IDENTITY, &ddv.at(i));
            let det = pw::det(&m);
            min_det = min_det.min(det.abs());
            let adj = pw::adj(&m);
            vals.push((m, pw::scale(&adj, 1.0 / det), adj, det));
        }
        if !(min_det >= DET_FLOOR) {
            return Err(Error::FlowDegenerate { time, min_det });
        }
        Ok(JacobianData {
            dx: pw::tensor_from_fn(&grid, |i| vals[i].0),
            a: pw::tensor_from_fn(&grid, |i| vals[i].1),
            adj: pw::tensor_from_fn(&grid, |i| vals[i].2),
            j: pw::scalar_from_fn(&grid, |i| vals[i].3),
        })
    }

    pub fn grid(&self) -> &Grid {
        self.j.grid()
    }

    pub fn is_identity(&self) -> bool {
        let id = TensorField::identity(self.grid());
        self.a == id
    }

    /// `‖J − 1‖_∞`.
    pub fn volume_defect(&self) -> f64 {
        self.j.physical().iter().fold(0.0, |m, x| m.max((x - 1.0).abs()))
    }
}

pub fn jacobian_data(flow: &FlowMap, t: f64) -> Result<JacobianData> {
    let k = flow.index_of(t)?;
    JacobianData::from_displacement(&flow.displacement[k], flow.times[k])
}

/// Outcome of [`smallness_check`].
#[derive(Clone, Debug, PartialEq)]
pub struct Smallness {
    /// Running integral at the final time (or at exit).
    pub integral: f64,
    /// First mesh time where the integral exceeds `ε₀`.
    pub exceeded_at: Option<f64>,
}

impl Smallness {
    pub fn ok(&self) -> bool {
        self.exceeded_at.is_none()
    }
}

/// Running `∫₀ᵗ ‖Dv̄‖_{Ḃ^{2/p}_{p,1}}` compared with `ε₀` (non-strictly).
pub fn smallness_check(
    times: &[f64],
    velocity: &[VectorField],
    epsilon0: f64,
    p: f64,
) -> Result<Smallness> {
    let first = velocity.first().ok_or(Error::EmptyTrajectory)?;
    let part = DyadicPartition::new(first.grid());
    let params = BesovParams::sum(2.0 / p, p);
    let norms: Vec<f64> = velocity
        .iter()
        .map(|v| part.besov_norm(&ops::jacobian(v), params))
        .collect::<Result<_>>()?;
    running_smallness(times, &norms, epsilon0)
}

pub(crate) fn running_smallness(times: &[f64], norms: &[f64], epsilon0: f64) -> Result<Smallness> {
    let dt = uniform_step(times)?;
    let mut acc = 0.0;
    for k in 1..norms.len() {
        acc += 0.5 * dt * (norms[k - 1] + norms[k]);
        if acc > epsilon0 {
            return Ok(Smallness { integral: acc, exceeded_at: Some(times[k]) });
        }
    }
    Ok(Smallness { integral: acc, exceeded_at: None })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// `f ∘ X`.
    Forward,
    /// `f ∘ X^{-1}`.
    Inverse,
}

/// Grid points in physical coordinates, row-major.
pub fn grid_points(grid: &Grid) -> Vec<[f64; 2]> {
    let n = grid.n_points();
    (0..grid.len()).map(|i| [grid.coord(i / n), grid.coord(i % n)]).collect()
}

/// `X(t, y)` at every grid label.
pub fn forward_points(d: &VectorField) -> Vec<[f64; 2]> {
    let dv = VectorValues::of(d);
    grid_points(d.grid())
        .into_iter()
        .enumerate()
        .map(|(i, y)| {
            let di = dv.at(i);
            [y[0] + di[0], y[1] + di[1]]
        })
        .collect()
}

/// `X^{-1}(t, x)` at every grid point by damped fixed-point iteration.
pub fn inverse_points(d: &VectorField, time: f64) -> Result<Vec<[f64; 2]>> {
    let grid = d.grid();
    let d1 = FourierInterpolant::new(d.component(0));
    let d2 = FourierInterpolant::new(d.component(1));
    let x = grid_points(grid);
    let mut y = x.clone();
    let mut damping = 1.0;
    let mut last = f64::INFINITY;
    for _ in 0..INVERSE_MAX_ITERS {
        let mut residual: f64 = 0.0;
        let mut next = Vec::with_capacity(y.len());
        for (yi, xi) in y.iter().zip(&x) {
            let e = [d1.eval(yi[0], yi[1]), d2.eval(yi[0], yi[1])];
            // r = X(y) − x
            let r = [yi[0] + e[0] - xi[0], yi[1] + e[1] - xi[1]];
            residual = residual.max(r[0].abs().max(r[1].abs()));
            next.push([yi[0] - damping * r[0], yi[1] - damping * r[1]]);
        }
        if residual <= INVERSE_TOL {
            return Ok(y);
        }
        if residual > last && damping == 1.0 {
            damping = 0.5;
        }
        last = residual;
        y = next;
    }
    Err(Error::FlowNotInvertible { time, residual: last })
}

/// Samples every component of `f` at arbitrary points.
pub fn sample_at<F: Field>(f: &F, points: &[[f64; 2]]) -> F {
    let grid = f.grid().clone();
    f.map_components(|c| {
        let it = FourierInterpolant::new(c);
        ScalarField::from_physical(&grid, it.eval_many(points)).unwrap()
    })
}

/// `f ∘ X(t)` or `f ∘ X(t)^{-1}` by trigonometric interpolation.
pub fn compose_with_flow<F: Field>(f: &F, flow: &FlowMap, t: f64, direction: Direction) -> Result<F> {
    let k = flow.index_of(t)?;
    let d = &flow.displacement[k];
    JacobianData::from_displacement(d, t)?;
    let points = match direction {
        Direction::Forward => forward_points(d),
        Direction::Inverse => inverse_points(d, t)?,
    };
    Ok(sample_at(f, &points))
}

/// `k(ρ₀)·A(ᵗA∇ρ₀)⊗(ᵗA∇ρ₀)`, physical and not yet dealiased.
pub fn capillary_tensor(rho0: &ScalarField, grad_rho0: &VectorField, a: &TensorField, k_fn: &CoefficientFn) -> TensorField {
    let grid = rho0.grid();
    let r = rho0.physical();
    let g = VectorValues::of(grad_rho0);
    let av = TensorValues::of(a);
    pw::tensor_from_fn(grid, |i| {
        let am = av.at(i);
        let b = pw::apply(&pw::transpose(&am), g.at(i));
        pw::scale(&pw::outer(pw::apply(&am, b), b), k_fn.eval(r[i]))
    })
}

/// Column divergence of a dealiased tensor, spectral output.
pub fn dealiased_divergence(t: &TensorField) -> VectorField {
    ops::tensor_divergence(&t.dealias())
}

/// `(1/ρ₀)·v`, dealiased.
pub fn divide_by_density(v: &VectorField, rho0: &ScalarField) -> VectorField {
    let inv = rho0.map_physical(|r| 1.0 / r);
    v.map_components(|c| c.mul_dealiased(&inv))
}

/// `−κ(1/ρ₀) div[k(ρ₀) A(ᵗA∇ρ₀)⊗(ᵗA∇ρ₀)]` with `κ = κ̄/μ̄²`.
///
/// Returns the exact zero field when `κ = 0` or `∇ρ₀ = 0`.
pub fn lagrangian_capillary_term(
    rho0: &ScalarField,
    jac: &JacobianData,
    k_fn: &CoefficientFn,
    kappa_over_mu2: f64,
    rho_floor: f64,
) -> Result<VectorField> {
    check_density(rho0, rho_floor)?;
    let grid = rho0.grid();
    if kappa_over_mu2 == 0.0 {
        return Ok(VectorField::zeros(grid).to_spectral());
    }
    let grad = ops::gradient(rho0);
    if grad.is_exactly_zero() {
        return Ok(VectorField::zeros(grid).to_spectral());
    }
    let t = capillary_tensor(rho0, &grad.to_physical(), &jac.a, k_fn);
    Ok(divide_by_density(&dealiased_divergence(&t), rho0).scale(-kappa_over_mu2))
}

pub(crate) fn check_density(rho0: &ScalarField, floor: f64) -> Result<()> {
    let min = rho0.min();
    if !(min >= floor) {
        return Err(Error::DensityBelowFloor { min, floor });
    }
    Ok(())
}

/// `M = (I − adj DX)w` with `div M` by two routes.
#[derive(Clone, Debug)]
pub struct ConstraintTerm {
    pub m: VectorField,
    /// Spectral divergence of the dealiased `M`.
    pub div_m: ScalarField,
    /// The contraction `Dw : (I − J·A)`, dealiased.
    pub div_m_contraction: ScalarField,
}

pub fn divergence_constraint_term(w: &VectorField, jac: &JacobianData) -> Result<ConstraintTerm> {
    if w.grid() != jac.grid() {
        return Err(Error::GridMismatch);
    }
    let grid = w.grid();
    let wv = w.to_physical();
    let wvals = VectorValues::of(&wv);
    let adj = TensorValues::of(&jac.adj);
    let m = pw::vector_from_fn(grid, |i| pw::apply(&pw::sub(&pw::IDENTITY, &adj.at(i)), wvals.at(i)))
        .dealias();
    let div_m = ops::divergence(&m);
    let dw = ops::jacobian(w).to_physical();
    let dwv = TensorValues::of(&dw);
    let jv = jac.j.physical();
    let av = TensorValues::of(&jac.a);
    let contraction = pw::scalar_from_fn(grid, |i| {
        let b = pw::sub(&pw::IDENTITY, &pw::scale(&av.at(i), jv[i]));
        pw::trace_of_product(&dwv.at(i), &b)
    })
    .dealias();
    Ok(ConstraintTerm { m, div_m, div_m_contraction: contraction })
}

/// `‖div(adj(DX)·u)‖₂`, the transformed incompressibility residual.
///
/// Evaluated as `div u − div M(u)` with the dealiased `M` of
/// [`divergence_constraint_term`], which is the form the stepper enforces.
pub fn transformed_divergence(u: &VectorField, jac: &JacobianData) -> f64 {
    let grid = u.grid();
    let uv = u.to_physical();
    let vals = VectorValues::of(&uv);
    let adj = TensorValues::of(&jac.adj);
    let m = pw::vector_from_fn(grid, |i| pw::apply(&pw::sub(&pw::IDENTITY, &adj.at(i)), vals.at(i))).dealias();
    ops::divergence(&u.to_spectral()).axpy(-1.0, &ops::divergence(&m)).norm_l2()
}
