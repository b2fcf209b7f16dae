//! Exact spectral calculus on the torus.
//!
//! Index conventions: `(Dz)_{ij} = ∂_j z_i`, the tensor divergence acts on
//! the first index, `(div K)_j = Σ_i ∂_i K_{ij}`, and `D(z) = Dz + ᵗDz`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{Field, ScalarField, TensorField, VectorField};
use crate::grid::Grid;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Partial derivative along axis `axis` (0 is `x1`).
pub fn partial(f: &ScalarField, axis: usize) -> ScalarField {
    let grid = f.grid().clone();
    let n = grid.n_points();
    f.map_spectral(|idx, z| {
        let k = if axis == 0 {
            grid.deriv_wavenumber(idx / n)
        } else {
            grid.deriv_wavenumber(idx % n)
        };
        I * k * z
    })
}

pub fn gradient(f: &ScalarField) -> VectorField {
    VectorField::from_components(vec![partial(f, 0), partial(f, 1)])
}

pub fn divergence(v: &VectorField) -> ScalarField {
    &partial(v.component(0), 0) + &partial(v.component(1), 1)
}

pub fn laplacian<F: Field>(f: &F) -> F {
    f.map_components(|c| {
        let grid = c.grid().clone();
        c.map_spectral(|idx, z| -grid.k_squared(idx) * z)
    })
}

/// Mean-zero solution of `Δφ = f` (the mean of `f` is discarded).
pub fn inverse_laplacian(f: &ScalarField) -> ScalarField {
    let grid = f.grid().clone();
    f.map_spectral(|idx, z| {
        let k2 = grid.k_squared(idx);
        if k2 == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            -z / k2
        }
    })
}

/// `(Dz)_{ij} = ∂_j z_i`.
pub fn jacobian(z: &VectorField) -> TensorField {
    let d = z.dim();
    let mut entries = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            entries.push(partial(z.component(i), j));
        }
    }
    TensorField::from_components(entries)
}

/// `D(u)_{ij} = ∂_i u_j + ∂_j u_i`.
pub fn sym_double_gradient(u: &VectorField) -> TensorField {
    let dz = jacobian(u);
    let t = dz.transpose();
    dz.axpy(1.0, &t)
}

/// Column divergence `(div K)_j = Σ_i ∂_i K_{ij}`.
pub fn tensor_divergence(k: &TensorField) -> VectorField {
    let d = k.dim();
    let comps = (0..d)
        .map(|j| {
            let mut acc = partial(k.entry(0, j), 0);
            for i in 1..d {
                acc = &acc + &partial(k.entry(i, j), i);
            }
            acc
        })
        .collect();
    VectorField::from_components(comps)
}

/// Leray split `v = Pv + Qv` using `Q̂v = k(k·v̂)/|k|²`; the mean goes to `Pv`.
pub fn leray_project(v: &VectorField) -> (VectorField, VectorField) {
    let grid = v.grid().clone();
    let n = grid.n_points();
    let a = v.component(0).spectral();
    let b = v.component(1).spectral();
    let mut qa = vec![Complex64::new(0.0, 0.0); grid.len()];
    let mut qb = qa.clone();
    for idx in 0..grid.len() {
        let k1 = grid.deriv_wavenumber(idx / n);
        let k2 = grid.deriv_wavenumber(idx % n);
        let kk = k1 * k1 + k2 * k2;
        if kk == 0.0 {
            continue;
        }
        let dot = (a[idx] * k1 + b[idx] * k2) / kk;
        qa[idx] = dot * k1;
        qb[idx] = dot * k2;
    }
    let q = VectorField::from_components(vec![
        ScalarField::from_spectral(&grid, qa).unwrap(),
        ScalarField::from_spectral(&grid, qb).unwrap(),
    ]);
    let p = v.to_spectral().axpy(-1.0, &q);
    (p, q)
}

/// Multiplies every component by `e^{-νt|k|²}`.
pub fn heat_propagate<F: Field>(f: &F, t: f64, viscosity: f64) -> Result<F> {
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    if viscosity <= 0.0 {
        return Err(Error::InvalidArgument(format!("viscosity {viscosity} must be positive")));
    }
    Ok(f.map_components(|c| {
        let grid = c.grid().clone();
        c.map_spectral(|idx, z| z * (-viscosity * t * grid.k_squared(idx)).exp())
    }))
}

/// Spectral multiplier applied component-wise: `m(|k|²)`.
pub fn radial_multiplier<F: Field>(f: &F, m: impl Fn(f64) -> f64) -> F {
    f.map_components(|c| {
        let grid = c.grid().clone();
        c.map_spectral(|idx, z| z * m(grid.k_squared(idx)))
    })
}

/// All second derivatives `∂_a∂_b f_i`, stacked as a generic field.
pub fn hessian<F: Field>(f: &F) -> Stack {
    let mut comps = Vec::new();
    for c in f.components() {
        let c = c.to_spectral();
        for a in 0..2 {
            let da = partial(&c, a);
            for b in 0..2 {
                comps.push(partial(&da, b));
            }
        }
    }
    Stack(comps)
}

/// An arbitrary list of scalar components measured with a pointwise
/// Euclidean norm.
#[derive(Clone, Debug, PartialEq)]
pub struct Stack(pub Vec<ScalarField>);

impl Field for Stack {
    fn components(&self) -> &[ScalarField] {
        &self.0
    }

    fn from_components(components: Vec<ScalarField>) -> Self {
        Stack(components)
    }
}

/// The operator families reachable through [`differentiate`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Derivative {
    Gradient,
    Divergence,
    Laplacian,
    Jacobian,
    SymDoubleGradient,
}

/// A field of any rank.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyField {
    Scalar(ScalarField),
    Vector(VectorField),
    Tensor(TensorField),
}

impl AnyField {
    pub fn grid(&self) -> &Grid {
        match self {
            AnyField::Scalar(f) => f.grid(),
            AnyField::Vector(f) => f.grid(),
            AnyField::Tensor(f) => f.grid(),
        }
    }
}

/// Rank-dispatching front end to the typed operators above.
pub fn differentiate(field: &AnyField, kind: Derivative) -> Result<AnyField> {
    use AnyField::*;
    Ok(match (field, kind) {
        (Scalar(f), Derivative::Gradient) => Vector(gradient(f)),
        (Scalar(f), Derivative::Laplacian) => Scalar(laplacian(f)),
        (Vector(v), Derivative::Divergence) => Scalar(divergence(v)),
        (Vector(v), Derivative::Laplacian) => Vector(laplacian(v)),
        (Vector(v), Derivative::Jacobian) => Tensor(jacobian(v)),
        (Vector(v), Derivative::SymDoubleGradient) => Tensor(sym_double_gradient(v)),
        (Tensor(t), Derivative::Divergence) => Vector(tensor_divergence(t)),
        (Tensor(t), Derivative::Laplacian) => Tensor(laplacian(t)),
        (f, k) => {
            let rank = match f {
                Scalar(_) => 0,
                Vector(_) => 1,
                Tensor(_) => 2,
            };
            return Err(Error::InvalidArgument(format!("{k:?} is undefined on rank-{rank} fields")));
        }
    })
}
