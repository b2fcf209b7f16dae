use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ScalarField;

/// A density-dependent coefficient `f(ρ) = 1 + Σ_m c_m (ρ−1)^m`, `m ≥ 1`.
///
/// Writing it around `ρ = 1` makes `f(1) = 1` hold by construction.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CoefficientFn {
    /// `c_1, c_2, …`; empty means `f ≡ 1`.
    #[serde(default)]
    pub poly: Vec<f64>,
}

impl CoefficientFn {
    pub fn one() -> Self {
        CoefficientFn { poly: Vec::new() }
    }

    pub fn new(poly: Vec<f64>) -> Self {
        CoefficientFn { poly }
    }

    pub fn is_one(&self) -> bool {
        self.poly.iter().all(|&c| c == 0.0)
    }

    pub fn eval(&self, rho: f64) -> f64 {
        let x = rho - 1.0;
        let mut acc = 0.0;
        for &c in self.poly.iter().rev() {
            acc = (acc + c) * x;
        }
        1.0 + acc
    }

    pub fn eval_field(&self, rho: &ScalarField) -> ScalarField {
        rho.map_physical(|r| self.eval(r))
    }
}

/// Physical parameters of a run.
#[derive(Clone, Debug)]
pub struct Coefficients {
    pub mu_bar: f64,
    pub kappa_bar: f64,
    pub mu_fn: CoefficientFn,
    pub k_fn: CoefficientFn,
    pub rho0: ScalarField,
    pub rho_floor: f64,
}

pub const DEFAULT_RHO_FLOOR: f64 = 0.1;

impl Coefficients {
    pub fn new(
        mu_bar: f64,
        kappa_bar: f64,
        mu_fn: CoefficientFn,
        k_fn: CoefficientFn,
        rho0: ScalarField,
        rho_floor: f64,
    ) -> Result<Self> {
        if !(mu_bar > 0.0 && mu_bar.is_finite()) {
            return Err(Error::InvalidArgument(format!("mu_bar = {mu_bar} must be positive")));
        }
        if !(kappa_bar >= 0.0 && kappa_bar.is_finite()) {
            return Err(Error::InvalidArgument(format!("kappa_bar = {kappa_bar} must be nonnegative")));
        }
        if !(rho_floor > 0.0) {
            return Err(Error::InvalidArgument(format!("rho_floor = {rho_floor} must be positive")));
        }
        let rho0 = rho0.to_physical();
        let min = rho0.min();
        if min < rho_floor {
            return Err(Error::DensityBelowFloor { min, floor: rho_floor });
        }
        let mu_min = rho0.physical().iter().map(|&r| mu_fn.eval(r)).fold(f64::INFINITY, f64::min);
        if mu_min <= 0.0 {
            return Err(Error::InvalidArgument(format!("mu(rho0) reaches {mu_min}, must stay positive")));
        }
        Ok(Coefficients { mu_bar, kappa_bar, mu_fn, k_fn, rho0, rho_floor })
    }

    /// Homogeneous unit density, unit viscosity, no capillarity.
    pub fn homogeneous(grid: &crate::Grid) -> Self {
        Coefficients {
            mu_bar: 1.0,
            kappa_bar: 0.0,
            mu_fn: CoefficientFn::one(),
            k_fn: CoefficientFn::one(),
            rho0: ScalarField::constant(grid, 1.0),
            rho_floor: DEFAULT_RHO_FLOOR,
        }
    }

    /// Capillary weight `κ̄/μ̄²` of the unit-viscosity system.
    pub fn kappa(&self) -> f64 {
        self.kappa_bar / (self.mu_bar * self.mu_bar)
    }

    pub fn with_kappa_bar(&self, kappa_bar: f64) -> Self {
        Coefficients { kappa_bar, ..self.clone() }
    }

    pub fn is_homogeneous(&self) -> bool {
        self.mu_fn.is_one() && self.rho0.physical().iter().all(|&r| r == 1.0)
    }
}
