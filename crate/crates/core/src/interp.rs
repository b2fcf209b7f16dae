//! Trigonometric interpolation at scattered points.
//!
//! Evaluates the band-limited interpolant of a grid field off the grid with
//! Gaussian gridding (a type-2 non-uniform FFT): deconvolve the spectrum by
//! the Gaussian's symbol, synthesize on a 2× oversampled grid, then gather
//! with a truncated Gaussian. With the width below the error is ~1e-13
//! relative to the coefficient ℓ¹ mass.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::field::ScalarField;
use crate::grid::Grid;

const OVERSAMPLE: usize = 2;
const HALF_WIDTH: usize = 12;

pub struct FourierInterpolant {
    fine_n: usize,
    fine: Vec<f64>,
    tau: f64,
}

impl FourierInterpolant {
    pub fn new(f: &ScalarField) -> Self {
        let grid = f.grid();
        let n = grid.n_points();
        let m = OVERSAMPLE * n;
        let tau = PI * HALF_WIDTH as f64 / ((n * n) as f64 * (OVERSAMPLE as f64) * (OVERSAMPLE as f64 - 0.5));
        let coeffs = f.spectral();
        let fine_grid = Grid::new(m).expect("oversampled grid");
        let mut buf = vec![Complex64::new(0.0, 0.0); m * m];
        // Interpolant coefficients are û/n; the extra m undoes the fine
        // transform's unitary scaling.
        let norm = (PI / tau) * m as f64 / n as f64;
        let half = n / 2;
        for a in 0..n {
            for b in 0..n {
                let c = coeffs[a * n + b];
                if c.re == 0.0 && c.im == 0.0 {
                    continue;
                }
                // A Nyquist coefficient is split evenly between ±n/2.
                let ks1: &[i64] = if a == half { &[-(half as i64), half as i64] } else { &[grid.wavenumber(a)][..] };
                let ks2: &[i64] = if b == half { &[-(half as i64), half as i64] } else { &[grid.wavenumber(b)][..] };
                let share = 1.0 / (ks1.len() * ks2.len()) as f64;
                for &k1 in ks1 {
                    for &k2 in ks2 {
                        let w = norm * share * (((k1 * k1 + k2 * k2) as f64) * tau).exp();
                        let i1 = k1.rem_euclid(m as i64) as usize;
                        let i2 = k2.rem_euclid(m as i64) as usize;
                        buf[i1 * m + i2] += c * w;
                    }
                }
            }
        }
        fine_grid.fft2(&mut buf, true);
        let fine = buf.into_iter().map(|z| z.re).collect();
        FourierInterpolant { fine_n: m, fine, tau }
    }

    fn weights(&self, x: f64) -> (i64, [f64; 2 * HALF_WIDTH]) {
        let m = self.fine_n as f64;
        let step = 2.0 * PI / m;
        let base = (x / step).floor() as i64 - HALF_WIDTH as i64 + 1;
        let mut w = [0.0; 2 * HALF_WIDTH];
        for (q, wq) in w.iter_mut().enumerate() {
            let d = x - (base + q as i64) as f64 * step;
            *wq = (-d * d / (4.0 * self.tau)).exp();
        }
        (base, w)
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let m = self.fine_n as i64;
        let (bx, wx) = self.weights(x);
        let (by, wy) = self.weights(y);
        let cols: Vec<usize> = (0..2 * HALF_WIDTH).map(|q| (by + q as i64).rem_euclid(m) as usize).collect();
        let mut acc = 0.0;
        for (p, &wp) in wx.iter().enumerate() {
            let row = (bx + p as i64).rem_euclid(m) as usize * self.fine_n;
            let mut s = 0.0;
            for (q, &wq) in wy.iter().enumerate() {
                s += self.fine[row + cols[q]] * wq;
            }
            acc += wp * s;
        }
        acc / (m * m) as f64
    }

    pub fn eval_many(&self, points: &[[f64; 2]]) -> Vec<f64> {
        points.iter().map(|p| self.eval(p[0], p[1])).collect()
    }
}
