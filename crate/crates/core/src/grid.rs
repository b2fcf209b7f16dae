use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Uniform periodic grid on the torus `[0, 2π)^dim`.
///
/// Cloning is cheap: the FFT plans are shared.
#[derive(Clone)]
pub struct Grid {
    n: usize,
    dim: usize,
    plans: Arc<Plans>,
}

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Grid {
    pub const LENGTH: f64 = 2.0 * PI;

    /// A 2-D grid with `n` points per direction.
    pub fn new(n: usize) -> Result<Self> {
        Self::with_dim(n, 2)
    }

    pub fn with_dim(n: usize, dim: usize) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "n_points = {n} must be a power of two and at least 8"
            )));
        }
        if dim != 2 {
            return Err(Error::UnsupportedDimension(dim));
        }
        let mut planner = FftPlanner::new();
        let plans = Plans {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        };
        Ok(Grid { n, dim, plans: Arc::new(plans) })
    }

    pub fn n_points(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn length(&self) -> f64 {
        Self::LENGTH
    }

    pub fn spacing(&self) -> f64 {
        Self::LENGTH / self.n as f64
    }

    /// Total number of grid points.
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Quadrature weight of one cell.
    pub fn cell_area(&self) -> f64 {
        let h = self.spacing();
        h * h
    }

    /// Physical coordinate of index `i` along an axis.
    pub fn coord(&self, i: usize) -> f64 {
        i as f64 * self.spacing()
    }

    /// Signed integer wavenumber of index `i`; the Nyquist index maps to `-n/2`.
    pub fn wavenumber(&self, i: usize) -> i64 {
        let n = self.n as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    /// Wavenumber used by odd-order derivatives: Nyquist is zeroed so that
    /// derivatives of real fields stay real.
    pub fn deriv_wavenumber(&self, i: usize) -> f64 {
        if i == self.n / 2 {
            0.0
        } else {
            self.wavenumber(i) as f64
        }
    }

    /// `|k|^2` at flat spectral index `idx`.
    pub fn k_squared(&self, idx: usize) -> f64 {
        let (a, b) = (idx / self.n, idx % self.n);
        let (k1, k2) = (self.wavenumber(a) as f64, self.wavenumber(b) as f64);
        k1 * k1 + k2 * k2
    }

    /// Largest retained wavenumber under the 2/3 rule.
    pub fn dealias_cutoff(&self) -> i64 {
        // Keep |k_i| <= (2/3)(n/2) = n/3.
        (self.n as i64) / 3
    }

    pub(crate) fn fft2(&self, data: &mut [Complex64], inverse: bool) {
        let n = self.n;
        let plan = if inverse { &self.plans.inverse } else { &self.plans.forward };
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        plan.process_with_scratch(data, &mut scratch);
        transpose_square(data, n);
        plan.process_with_scratch(data, &mut scratch);
        transpose_square(data, n);
        let scale = 1.0 / n as f64;
        for z in data.iter_mut() {
            *z *= scale;
        }
    }
}

fn transpose_square(data: &mut [Complex64], n: usize) {
    const B: usize = 16;
    for ib in (0..n).step_by(B) {
        for jb in (ib..n).step_by(B) {
            for i in ib..(ib + B).min(n) {
                let start = if ib == jb { i + 1 } else { jb };
                for j in start..(jb + B).min(n) {
                    data.swap(i * n + j, j * n + i);
                }
            }
        }
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.dim == other.dim
    }
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Grid({}^{})", self.n, self.dim)
    }
}
