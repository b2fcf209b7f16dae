//! Pointwise 2×2 algebra over physical grid values.

use std::borrow::Cow;

use crate::field::{Field, ScalarField, TensorField, VectorField};
use crate::grid::Grid;

/// Row-major 2×2 matrix.
pub type M2 = [f64; 4];

#[inline]
pub fn mul(a: &M2, b: &M2) -> M2 {
    [
        a[0] * b[0] + a[1] * b[2],
        a[0] * b[1] + a[1] * b[3],
        a[2] * b[0] + a[3] * b[2],
        a[2] * b[1] + a[3] * b[3],
    ]
}

#[inline]
pub fn transpose(a: &M2) -> M2 {
    [a[0], a[2], a[1], a[3]]
}

#[inline]
pub fn det(a: &M2) -> f64 {
    a[0] * a[3] - a[1] * a[2]
}

/// Transposed cofactor matrix.
#[inline]
pub fn adj(a: &M2) -> M2 {
    [a[3], -a[1], -a[2], a[0]]
}

#[inline]
pub fn apply(a: &M2, v: [f64; 2]) -> [f64; 2] {
    [a[0] * v[0] + a[1] * v[1], a[2] * v[0] + a[3] * v[1]]
}

#[inline]
pub fn outer(a: [f64; 2], b: [f64; 2]) -> M2 {
    [a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]]
}

#[inline]
pub fn add(a: &M2, b: &M2) -> M2 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]
}

#[inline]
pub fn sub(a: &M2, b: &M2) -> M2 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]]
}

#[inline]
pub fn scale(a: &M2, s: f64) -> M2 {
    [a[0] * s, a[1] * s, a[2] * s, a[3] * s]
}

#[inline]
pub fn trace_of_product(a: &M2, b: &M2) -> f64 {
    a[0] * b[0] + a[1] * b[2] + a[2] * b[1] + a[3] * b[3]
}

pub const IDENTITY: M2 = [1.0, 0.0, 0.0, 1.0];

/// Borrowed physical values of a tensor field.
pub struct TensorValues<'a>(pub [Cow<'a, [f64]>; 4]);

impl<'a> TensorValues<'a> {
    pub fn of(t: &'a TensorField) -> Self {
        TensorValues([
            t.entry(0, 0).physical(),
            t.entry(0, 1).physical(),
            t.entry(1, 0).physical(),
            t.entry(1, 1).physical(),
        ])
    }

    #[inline]
    pub fn at(&self, i: usize) -> M2 {
        [self.0[0][i], self.0[1][i], self.0[2][i], self.0[3][i]]
    }
}

pub struct VectorValues<'a>(pub [Cow<'a, [f64]>; 2]);

impl<'a> VectorValues<'a> {
    pub fn of(v: &'a VectorField) -> Self {
        VectorValues([v.component(0).physical(), v.component(1).physical()])
    }

    #[inline]
    pub fn at(&self, i: usize) -> [f64; 2] {
        [self.0[0][i], self.0[1][i]]
    }
}

pub fn tensor_from_fn(grid: &Grid, f: impl Fn(usize) -> M2) -> TensorField {
    let mut e: [Vec<f64>; 4] = Default::default();
    for v in e.iter_mut() {
        v.reserve(grid.len());
    }
    for i in 0..grid.len() {
        let m = f(i);
        for q in 0..4 {
            e[q].push(m[q]);
        }
    }
    TensorField::from_components(
        e.into_iter().map(|v| ScalarField::from_physical(grid, v).unwrap()).collect(),
    )
}

pub fn vector_from_fn(grid: &Grid, f: impl Fn(usize) -> [f64; 2]) -> VectorField {
    let mut a = Vec::with_capacity(grid.len());
    let mut b = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let v = f(i);
        a.push(v[0]);
        b.push(v[1]);
    }
    VectorField::from_components(vec![
        ScalarField::from_physical(grid, a).unwrap(),
        ScalarField::from_physical(grid, b).unwrap(),
    ])
}

pub fn scalar_from_fn(grid: &Grid, f: impl Fn(usize) -> f64) -> ScalarField {
    ScalarField::from_physical(grid, (0..grid.len()).map(f).collect()).unwrap()
}
