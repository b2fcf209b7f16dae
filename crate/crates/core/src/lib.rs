//! Numerical core for incompressible Navier-Stokes-Korteweg flows on the
//! periodic square: spectral fields, Littlewood-Paley analysis, Lagrangian
//! flow maps and the fixed-point and reference solvers built on them.

pub mod besov;
pub mod error;
pub mod field;
pub mod grid;
pub mod interp;
pub mod ops;
pub mod snapshot;

pub use error::{Error, Result};
pub use field::{Field, Representation, ScalarField, TensorField, VectorField};
pub use grid::Grid;
pub mod coefficients;
pub mod lagrangian;
pub mod pointwise;
pub mod solver;
