//! Per-block decay of the free solution against the envelope
//! `C(e^{−ct4^j}‖Δ_j ũ₀‖ + (κ̄/μ̄²)(1 − e^{−ct4^j})/(c4^j)·‖Δ_j ℙF_ρ₀‖)`.

use serde::Serialize;

use korteweg_core::besov::{DyadicPartition, Exponent};
use korteweg_core::coefficients::Coefficients;
use korteweg_core::ops;
use korteweg_core::solver::{free_capillary_forcing, FreeSolution};
use korteweg_core::{Field, VectorField};

use crate::error::{CliError, Context};

/// Samples below this fraction of a block's peak are not fitted.
const FLOOR: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockData {
    pub j: i32,
    pub init: f64,
    pub force: f64,
    /// `‖Δ_j u_L(t)‖₂` at the sample times.
    pub measured: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayFit {
    pub c_amplitude: f64,
    pub c_rate: f64,
    /// RMS of `measured/envelope − 1` over the fitted samples.
    pub residual: f64,
    pub max_deviation: f64,
    /// Smallest `C` for which the envelope bounds every sample.
    pub bounding_amplitude: f64,
    pub octaves: i32,
    pub samples: usize,
    pub blocks: Vec<BlockData>,
    pub times: Vec<f64>,
}

fn envelope(b: &BlockData, t: f64, c: f64, kappa: f64) -> f64 {
    let lam = c * (2.0 * b.j as f64).exp2();
    let e = (-lam * t).exp();
    e * b.init - kappa * (-lam * t).exp_m1() / lam * b.force
}

/// Log-ratios `ln(measured/envelope(C = 1))` for a rate `c`.
fn log_ratios(blocks: &[BlockData], times: &[f64], c: f64, kappa: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for b in blocks {
        let peak = b.measured.iter().cloned().fold(0.0, f64::max);
        for (k, &m) in b.measured.iter().enumerate() {
            if m > FLOOR * peak && m > 0.0 {
                out.push((m / envelope(b, times[k], c, kappa)).ln());
            }
        }
    }
    out
}

fn spread(r: &[f64]) -> (f64, f64) {
    let mean = r.iter().sum::<f64>() / r.len() as f64;
    let var = r.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / r.len() as f64;
    (mean, var)
}

/// Fits `(C, c)` to the free solution sampled at `times` (unit-viscosity
/// frame). `u0_unit` is `ũ₀`; only blocks with data take part.
pub fn dyadic_decay_fit(coeffs: &Coefficients, u0_unit: &VectorField, times: &[f64]) -> Result<DecayFit, CliError> {
    let ctx = || "dyadic decay".to_string();
    let free = FreeSolution::new(coeffs, u0_unit).context(ctx)?;
    let grid = u0_unit.grid();
    let part = DyadicPartition::new(grid);
    let kappa = coeffs.kappa();
    let force = if kappa > 0.0 {
        ops::leray_project(&free_capillary_forcing(coeffs).context(ctx)?).0.scale(1.0 / kappa)
    } else {
        VectorField::zeros(grid)
    };
    let l2 = Exponent::Finite(2.0);
    let samples: Vec<VectorField> = times.iter().map(|&t| free.velocity(t)).collect::<Result<_, _>>().context(ctx)?;
    let mut blocks = Vec::new();
    for j in part.indices() {
        let init = part.block_norm(u0_unit, j, l2).context(ctx)?;
        let f = part.block_norm(&force, j, l2).context(ctx)?;
        blocks.push(BlockData { j, init, force: f, measured: Vec::new() });
    }
    let top = blocks.iter().map(|b| b.init.max(kappa * b.force)).fold(0.0, f64::max);
    blocks.retain(|b| b.init.max(kappa * b.force) > FLOOR * top);
    for b in &mut blocks {
        b.measured = samples.iter().map(|u| part.block_norm(u, b.j, l2)).collect::<Result<_, _>>().context(ctx)?;
    }
    if blocks.is_empty() {
        return Err(CliError::Fit("no block carries data".into()));
    }
    // Golden-section search on ln c for the log-ratio variance.
    let cost = |lc: f64| spread(&log_ratios(&blocks, times, lc.exp(), kappa)).1;
    let (mut a, mut b) = ((0.05f64).ln(), (20.0f64).ln());
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut x1, mut x2) = (b - g * (b - a), a + g * (b - a));
    let (mut f1, mut f2) = (cost(x1), cost(x2));
    for _ in 0..100 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = cost(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = cost(x2);
        }
        if (b - a).abs() < 1e-12 {
            break;
        }
    }
    let c_rate = (0.5 * (a + b)).exp();
    let r = log_ratios(&blocks, times, c_rate, kappa);
    let (mean, _) = spread(&r);
    let c_amplitude = mean.exp();
    let dev: Vec<f64> = r.iter().map(|x| (x - mean).exp() - 1.0).collect();
    let residual = (dev.iter().map(|d| d * d).sum::<f64>() / dev.len() as f64).sqrt();
    let max_deviation = dev.iter().map(|d| d.abs()).fold(0.0, f64::max);
    let bounding_amplitude = r.iter().cloned().fold(f64::NEG_INFINITY, f64::max).exp();
    let octaves = blocks.last().unwrap().j - blocks[0].j;
    Ok(DecayFit {
        c_amplitude,
        c_rate,
        residual,
        max_deviation,
        bounding_amplitude,
        octaves,
        samples: r.len(),
        blocks,
        times: times.to_vec(),
    })
}
