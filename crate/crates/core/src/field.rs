//! Scalar, vector and tensor fields with a physical and a spectral face.
//!
//! The transform pair is unitary: `û_k = N^{-1/2} Σ_x u(x) e^{-ik·x}` and
//! back with the same factor, `N = n²`. A constant `c` therefore has the
//! single coefficient `c·n` at `k = 0`, and the physical L² norm
//! `(h² Σ |u|²)^{1/2}` equals `h·(Σ |û|²)^{1/2}`.

use std::borrow::Cow;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    Physical,
    Spectral,
}

#[derive(Clone, Debug, PartialEq)]
enum Data {
    Physical(Vec<f64>),
    Spectral(Vec<Complex64>),
}

#[derive(Clone, Debug)]
pub struct ScalarField {
    grid: Grid,
    data: Data,
}

impl ScalarField {
    pub fn zeros(grid: &Grid) -> Self {
        ScalarField { grid: grid.clone(), data: Data::Physical(vec![0.0; grid.len()]) }
    }

    pub fn zeros_spectral(grid: &Grid) -> Self {
        ScalarField { grid: grid.clone(), data: Data::Spectral(vec![ZERO; grid.len()]) }
    }

    pub fn constant(grid: &Grid, c: f64) -> Self {
        ScalarField { grid: grid.clone(), data: Data::Physical(vec![c; grid.len()]) }
    }

    pub fn from_physical(grid: &Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch { expected: grid.len(), got: values.len() });
        }
        Ok(ScalarField { grid: grid.clone(), data: Data::Physical(values) })
    }

    pub fn from_spectral(grid: &Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::LengthMismatch { expected: grid.len(), got: coeffs.len() });
        }
        Ok(ScalarField { grid: grid.clone(), data: Data::Spectral(coeffs) })
    }

    /// Samples `f(x1, x2)` at the grid points; index `i` runs along `x1`.
    pub fn from_fn(grid: &Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let n = grid.n_points();
        let mut v = Vec::with_capacity(grid.len());
        for i in 0..n {
            let x = grid.coord(i);
            for j in 0..n {
                v.push(f(x, grid.coord(j)));
            }
        }
        ScalarField { grid: grid.clone(), data: Data::Physical(v) }
    }

    /// Builds spectral coefficients from a function of the integer wavenumber.
    pub fn from_spectrum(grid: &Grid, f: impl Fn(i64, i64) -> Complex64) -> Self {
        let n = grid.n_points();
        let mut v = Vec::with_capacity(grid.len());
        for a in 0..n {
            let k1 = grid.wavenumber(a);
            for b in 0..n {
                v.push(f(k1, grid.wavenumber(b)));
            }
        }
        ScalarField { grid: grid.clone(), data: Data::Spectral(v) }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn representation(&self) -> Representation {
        match self.data {
            Data::Physical(_) => Representation::Physical,
            Data::Spectral(_) => Representation::Spectral,
        }
    }

    pub fn physical(&self) -> Cow<'_, [f64]> {
        match &self.data {
            Data::Physical(v) => Cow::Borrowed(v),
            Data::Spectral(c) => Cow::Owned(self.inverse(c.clone())),
        }
    }

    pub fn spectral(&self) -> Cow<'_, [Complex64]> {
        match &self.data {
            Data::Spectral(c) => Cow::Borrowed(c),
            Data::Physical(v) => Cow::Owned(self.forward(v)),
        }
    }

    pub fn into_physical_vec(self) -> Vec<f64> {
        let grid = self.grid;
        match self.data {
            Data::Physical(v) => v,
            Data::Spectral(mut c) => {
                grid.fft2(&mut c, true);
                c.into_iter().map(|z| z.re).collect()
            }
        }
    }

    pub fn into_spectral_vec(self) -> Vec<Complex64> {
        match self.data {
            Data::Spectral(c) => c,
            Data::Physical(ref v) => self.forward(v),
        }
    }

    fn forward(&self, v: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.grid.fft2(&mut buf, false);
        buf
    }

    fn inverse(&self, mut c: Vec<Complex64>) -> Vec<f64> {
        self.grid.fft2(&mut c, true);
        c.into_iter().map(|z| z.re).collect()
    }

    pub fn to_physical(&self) -> ScalarField {
        self.convert(Representation::Physical)
    }

    pub fn to_spectral(&self) -> ScalarField {
        self.convert(Representation::Spectral)
    }

    pub fn convert(&self, target: Representation) -> ScalarField {
        if self.representation() == target {
            return self.clone();
        }
        let data = match target {
            Representation::Physical => Data::Physical(self.physical().into_owned()),
            Representation::Spectral => Data::Spectral(self.spectral().into_owned()),
        };
        ScalarField { grid: self.grid.clone(), data }
    }

    pub fn into_representation(self, target: Representation) -> ScalarField {
        if self.representation() == target {
            return self;
        }
        let grid = self.grid.clone();
        let data = match target {
            Representation::Physical => Data::Physical(self.into_physical_vec()),
            Representation::Spectral => Data::Spectral(self.into_spectral_vec()),
        };
        ScalarField { grid, data }
    }

    /// Applies `f(flat_index, coefficient)` to every spectral coefficient.
    pub fn map_spectral(&self, f: impl Fn(usize, Complex64) -> Complex64) -> ScalarField {
        let c: Vec<Complex64> =
            self.spectral().iter().enumerate().map(|(i, &z)| f(i, z)).collect();
        ScalarField { grid: self.grid.clone(), data: Data::Spectral(c) }
    }

    pub fn map_physical(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        let v: Vec<f64> = self.physical().iter().map(|&x| f(x)).collect();
        ScalarField { grid: self.grid.clone(), data: Data::Physical(v) }
    }

    /// Pointwise combination of two fields, evaluated in physical space.
    pub fn zip_physical(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> ScalarField {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        let (a, b) = (self.physical(), other.physical());
        let v: Vec<f64> = a.iter().zip(b.iter()).map(|(&x, &y)| f(x, y)).collect();
        ScalarField { grid: self.grid.clone(), data: Data::Physical(v) }
    }

    /// Raw pointwise product (aliased); see [`ScalarField::mul_dealiased`].
    pub fn mul_pointwise(&self, other: &ScalarField) -> ScalarField {
        self.zip_physical(other, |x, y| x * y)
    }

    /// Pointwise product followed by the 2/3-rule truncation, spectral output.
    pub fn mul_dealiased(&self, other: &ScalarField) -> ScalarField {
        self.mul_pointwise(other).dealias()
    }

    /// Zeroes every coefficient with a wavenumber component beyond `n/3`.
    pub fn dealias(&self) -> ScalarField {
        let grid = &self.grid;
        let n = grid.n_points();
        let cut = grid.dealias_cutoff();
        let mut c = self.spectral().into_owned();
        for a in 0..n {
            let ka = grid.wavenumber(a).abs();
            for b in 0..n {
                if ka > cut || grid.wavenumber(b).abs() > cut {
                    c[a * n + b] = ZERO;
                }
            }
        }
        ScalarField { grid: grid.clone(), data: Data::Spectral(c) }
    }

    pub fn mean(&self) -> f64 {
        match &self.data {
            Data::Physical(v) => v.iter().sum::<f64>() / v.len() as f64,
            Data::Spectral(c) => c[0].re / self.grid.n_points() as f64,
        }
    }

    /// Integral over the torus by the rectangle rule.
    pub fn integral(&self) -> f64 {
        self.mean() * self.grid.length().powi(2)
    }

    /// Physical L² norm with `h²` quadrature weights.
    pub fn norm_l2(&self) -> f64 {
        let h2 = self.grid.cell_area();
        let s = match &self.data {
            Data::Physical(v) => v.iter().map(|x| x * x).sum::<f64>(),
            Data::Spectral(c) => c.iter().map(|z| z.norm_sqr()).sum::<f64>(),
        };
        (h2 * s).sqrt()
    }

    /// Physical L^p norm, `p = ∞` allowed.
    pub fn norm_lp(&self, p: f64) -> f64 {
        if p == 2.0 {
            return self.norm_l2();
        }
        lp_of_values(&self.physical(), p, self.grid.cell_area())
    }

    pub fn norm_linf(&self) -> f64 {
        self.physical().iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn min(&self) -> f64 {
        self.physical().iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.physical().iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn scale(&self, s: f64) -> ScalarField {
        let data = match &self.data {
            Data::Physical(v) => Data::Physical(v.iter().map(|x| x * s).collect()),
            Data::Spectral(c) => Data::Spectral(c.iter().map(|z| z * s).collect()),
        };
        ScalarField { grid: self.grid.clone(), data }
    }

    /// `self + s·other`, in the representation of `self`.
    pub fn axpy(&self, s: f64, other: &ScalarField) -> ScalarField {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        let data = match &self.data {
            Data::Physical(v) => {
                let o = other.physical();
                Data::Physical(v.iter().zip(o.iter()).map(|(a, b)| a + s * b).collect())
            }
            Data::Spectral(c) => {
                let o = other.spectral();
                Data::Spectral(c.iter().zip(o.iter()).map(|(a, b)| a + b * s).collect())
            }
        };
        ScalarField { grid: self.grid.clone(), data }
    }

    /// Largest deviation from Hermitian symmetry `û(-k) = conj û(k)`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.grid.n_points();
        let c = self.spectral();
        let mut worst: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                let (ma, mb) = ((n - a) % n, (n - b) % n);
                let d = (c[a * n + b] - c[ma * n + mb].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// True when every stored value is exactly zero.
    pub fn is_exactly_zero(&self) -> bool {
        match &self.data {
            Data::Physical(v) => v.iter().all(|&x| x == 0.0),
            Data::Spectral(c) => c.iter().all(|&z| z.re == 0.0 && z.im == 0.0),
        }
    }
}

pub(crate) fn lp_of_values(v: &[f64], p: f64, weight: f64) -> f64 {
    if p.is_infinite() {
        return v.iter().fold(0.0, |m, x| m.max(x.abs()));
    }
    if p == 1.0 {
        return weight * v.iter().map(|x| x.abs()).sum::<f64>();
    }
    if p == 2.0 {
        return (weight * v.iter().map(|x| x * x).sum::<f64>()).sqrt();
    }
    (weight * v.iter().map(|x| x.abs().powf(p)).sum::<f64>()).powf(1.0 / p)
}

impl PartialEq for ScalarField {
    fn eq(&self, other: &Self) -> bool {
        self.grid == other.grid && self.data == other.data
    }
}

impl Add for &ScalarField {
    type Output = ScalarField;
    fn add(self, rhs: &ScalarField) -> ScalarField {
        self.axpy(1.0, rhs)
    }
}

impl Sub for &ScalarField {
    type Output = ScalarField;
    fn sub(self, rhs: &ScalarField) -> ScalarField {
        self.axpy(-1.0, rhs)
    }
}

impl Mul<f64> for &ScalarField {
    type Output = ScalarField;
    fn mul(self, rhs: f64) -> ScalarField {
        self.scale(rhs)
    }
}

impl Neg for &ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        self.scale(-1.0)
    }
}

/// Common interface of scalar, vector and tensor fields.
///
/// A field is a list of scalar components; pointwise norms are Euclidean
/// (Frobenius for tensors) across components.
pub trait Field: Clone + Send + Sync + Sized {
    fn components(&self) -> &[ScalarField];
    fn from_components(components: Vec<ScalarField>) -> Self;

    fn grid(&self) -> &Grid {
        self.components()[0].grid()
    }

    fn representation(&self) -> Representation {
        self.components()[0].representation()
    }

    fn map_components(&self, f: impl Fn(&ScalarField) -> ScalarField) -> Self {
        Self::from_components(self.components().iter().map(f).collect())
    }

    fn convert(&self, target: Representation) -> Self {
        self.map_components(|c| c.convert(target))
    }

    fn to_spectral(&self) -> Self {
        self.convert(Representation::Spectral)
    }

    fn to_physical(&self) -> Self {
        self.convert(Representation::Physical)
    }

    fn dealias(&self) -> Self {
        self.map_components(ScalarField::dealias)
    }

    fn scale(&self, s: f64) -> Self {
        self.map_components(|c| c.scale(s))
    }

    fn axpy(&self, s: f64, other: &Self) -> Self {
        let comps = self
            .components()
            .iter()
            .zip(other.components())
            .map(|(a, b)| a.axpy(s, b))
            .collect();
        Self::from_components(comps)
    }

    /// L² norm of the pointwise Euclidean magnitude.
    fn norm_l2(&self) -> f64 {
        self.components().iter().map(|c| c.norm_l2().powi(2)).sum::<f64>().sqrt()
    }

    /// Sup of the pointwise Euclidean magnitude.
    fn norm_linf(&self) -> f64 {
        let comps: Vec<Cow<'_, [f64]>> = self.components().iter().map(|c| c.physical()).collect();
        let len = comps[0].len();
        (0..len)
            .map(|i| comps.iter().map(|c| c[i] * c[i]).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    fn is_exactly_zero(&self) -> bool {
        self.components().iter().all(ScalarField::is_exactly_zero)
    }
}

impl Field for ScalarField {
    fn components(&self) -> &[ScalarField] {
        std::slice::from_ref(self)
    }

    fn from_components(mut components: Vec<ScalarField>) -> Self {
        assert_eq!(components.len(), 1);
        components.pop().unwrap()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    comps: Vec<ScalarField>,
}

impl VectorField {
    pub fn new(components: Vec<ScalarField>) -> Result<Self> {
        let first = components.first().ok_or(Error::InvalidArgument("no components".into()))?;
        if components.len() != first.grid().dim() {
            return Err(Error::InvalidArgument(format!(
                "vector field needs {} components, got {}",
                first.grid().dim(),
                components.len()
            )));
        }
        let target = first.representation();
        if components.iter().any(|c| c.grid() != first.grid()) {
            return Err(Error::GridMismatch);
        }
        let comps = components.into_iter().map(|c| c.into_representation(target)).collect();
        Ok(VectorField { comps })
    }

    pub fn zeros(grid: &Grid) -> Self {
        VectorField { comps: (0..grid.dim()).map(|_| ScalarField::zeros(grid)).collect() }
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(f64, f64) -> [f64; 2]) -> Self {
        let c0 = ScalarField::from_fn(grid, |x, y| f(x, y)[0]);
        let c1 = ScalarField::from_fn(grid, |x, y| f(x, y)[1]);
        VectorField { comps: vec![c0, c1] }
    }

    pub fn constant(grid: &Grid, c: [f64; 2]) -> Self {
        VectorField { comps: vec![ScalarField::constant(grid, c[0]), ScalarField::constant(grid, c[1])] }
    }

    pub fn component(&self, i: usize) -> &ScalarField {
        &self.comps[i]
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }
}

impl Field for VectorField {
    fn components(&self) -> &[ScalarField] {
        &self.comps
    }

    fn from_components(components: Vec<ScalarField>) -> Self {
        VectorField { comps: components }
    }
}

/// Rank-2 tensor field; entry `(i, j)` is stored at `i·dim + j`.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorField {
    entries: Vec<ScalarField>,
}

impl TensorField {
    pub fn new(entries: Vec<ScalarField>) -> Result<Self> {
        let first = entries.first().ok_or(Error::InvalidArgument("no entries".into()))?;
        let d = first.grid().dim();
        if entries.len() != d * d {
            return Err(Error::InvalidArgument(format!(
                "tensor field needs {} entries, got {}",
                d * d,
                entries.len()
            )));
        }
        if entries.iter().any(|c| c.grid() != first.grid()) {
            return Err(Error::GridMismatch);
        }
        let target = first.representation();
        let entries = entries.into_iter().map(|c| c.into_representation(target)).collect();
        Ok(TensorField { entries })
    }

    pub fn identity(grid: &Grid) -> Self {
        let d = grid.dim();
        let entries = (0..d * d)
            .map(|k| ScalarField::constant(grid, if k / d == k % d { 1.0 } else { 0.0 }))
            .collect();
        TensorField { entries }
    }

    pub fn zeros(grid: &Grid) -> Self {
        let d = grid.dim();
        TensorField { entries: (0..d * d).map(|_| ScalarField::zeros(grid)).collect() }
    }

    pub fn entry(&self, i: usize, j: usize) -> &ScalarField {
        let d = self.dim();
        &self.entries[i * d + j]
    }

    pub fn dim(&self) -> usize {
        (self.entries.len() as f64).sqrt().round() as usize
    }

    pub fn transpose(&self) -> TensorField {
        let d = self.dim();
        let entries = (0..d * d).map(|k| self.entries[(k % d) * d + k / d].clone()).collect();
        TensorField { entries }
    }
}

impl Field for TensorField {
    fn components(&self) -> &[ScalarField] {
        &self.entries
    }

    fn from_components(components: Vec<ScalarField>) -> Self {
        TensorField { entries: components }
    }
}
