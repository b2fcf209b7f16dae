//! Littlewood-Paley blocks, homogeneous Besov norms and Bony's decomposition.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{lp_of_values, Field, ScalarField};
use crate::grid::Grid;

const CHI_IN: f64 = 0.75;
const CHI_OUT: f64 = 4.0 / 3.0;

fn psi(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

/// Smooth radial cutoff: 1 on `[0, 3/4]`, 0 beyond `4/3`, nonincreasing.
pub fn chi(r: f64) -> f64 {
    if r <= CHI_IN {
        return 1.0;
    }
    if r >= CHI_OUT {
        return 0.0;
    }
    let s = (r - CHI_IN) / (CHI_OUT - CHI_IN);
    let (a, b) = (psi(1.0 - s), psi(s));
    a / (a + b)
}

/// Annulus profile `φ(r) = χ(r/2) − χ(r)`.
pub fn phi(r: f64) -> f64 {
    chi(r / 2.0) - chi(r)
}

/// A Lebesgue or summation exponent in `[1, ∞]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Exponent {
    Finite(f64),
    Infinite(Infinity),
}

/// The literal string `"inf"` in serialized form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Infinity {
    #[serde(rename = "inf")]
    Inf,
}

impl Exponent {
    pub const INF: Exponent = Exponent::Infinite(Infinity::Inf);

    pub fn value(self) -> f64 {
        match self {
            Exponent::Finite(p) => p,
            Exponent::Infinite(_) => f64::INFINITY,
        }
    }

    fn check(self) -> Result<()> {
        match self {
            Exponent::Finite(p) if !(p >= 1.0 && p.is_finite()) => {
                Err(Error::InvalidArgument(format!("exponent {p} outside [1, ∞]")))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinite(_) => write!(f, "inf"),
        }
    }
}

/// Regularity `s`, integrability `p`, summation `r`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BesovParams {
    pub s: f64,
    pub p: Exponent,
    pub r: Exponent,
}

impl BesovParams {
    pub fn new(s: f64, p: Exponent, r: Exponent) -> Result<Self> {
        p.check()?;
        r.check()?;
        Ok(BesovParams { s, p, r })
    }

    /// `Ḃ^s_{p,1}` with finite `p`.
    pub fn sum(s: f64, p: f64) -> Self {
        BesovParams { s, p: Exponent::Finite(p), r: Exponent::Finite(1.0) }
    }
}

/// The dyadic partition tabulated on one grid.
#[derive(Clone, Debug)]
pub struct DyadicPartition {
    grid: Grid,
    j_min: i32,
    j_max: i32,
    // For each block, the spectral indices it touches and their weights.
    blocks: Vec<Vec<(usize, f64)>>,
    radius: Vec<f64>,
}

impl DyadicPartition {
    pub fn new(grid: &Grid) -> Self {
        let j_min = -2;
        let j_max = (grid.n_points() / 2).trailing_zeros() as i32 + 1;
        let radius: Vec<f64> = (0..grid.len()).map(|i| grid.k_squared(i).sqrt()).collect();
        let mut blocks = Vec::new();
        for j in j_min..=j_max {
            let scale = (-j as f64).exp2();
            let entries = radius
                .iter()
                .enumerate()
                .filter(|(_, &r)| r > 0.0)
                .filter_map(|(i, &r)| {
                    let w = phi(r * scale);
                    (w != 0.0).then_some((i, w))
                })
                .collect();
            blocks.push(entries);
        }
        DyadicPartition { grid: grid.clone(), j_min, j_max, blocks, radius }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn j_min(&self) -> i32 {
        self.j_min
    }

    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    pub fn indices(&self) -> std::ops::RangeInclusive<i32> {
        self.j_min..=self.j_max
    }

    fn block(&self, j: i32) -> Result<&[(usize, f64)]> {
        if j < self.j_min || j > self.j_max {
            return Err(Error::BlockOutOfRange { j, min: self.j_min, max: self.j_max });
        }
        Ok(&self.blocks[(j - self.j_min) as usize])
    }

    /// Worst deviation of `Σ_j φ(2^{-j}ξ)` from 1 over nonzero grid frequencies.
    pub fn unity_defect(&self) -> f64 {
        let mut sum = vec![0.0; self.grid.len()];
        for b in &self.blocks {
            for &(i, w) in b {
                sum[i] += w;
            }
        }
        sum.iter()
            .zip(&self.radius)
            .filter(|(_, &r)| r > 0.0)
            .map(|(s, _)| (s - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// `Δ_j u`, spectral.
    pub fn block_of<F: Field>(&self, u: &F, j: i32) -> Result<F> {
        self.check_grid(u.grid())?;
        let block = self.block(j)?;
        Ok(u.map_components(|c| {
            let src = c.spectral();
            let mut out = vec![Complex64::new(0.0, 0.0); src.len()];
            for &(i, w) in block {
                out[i] = src[i] * w;
            }
            ScalarField::from_spectral(&self.grid, out).unwrap()
        }))
    }

    /// The low-pass `S_j u = χ(2^{-j}D)u`, mean mode included.
    pub fn low_pass<F: Field>(&self, u: &F, j: i32) -> Result<F> {
        self.check_grid(u.grid())?;
        let scale = (-j as f64).exp2();
        Ok(u.map_components(|c| c.map_spectral(|i, z| z * chi(self.radius[i] * scale))))
    }

    fn check_grid(&self, g: &Grid) -> Result<()> {
        if *g != self.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    /// L^p norm of one block, pointwise Euclidean across components.
    pub fn block_norm<F: Field>(&self, u: &F, j: i32, p: Exponent) -> Result<f64> {
        let block = self.block(j)?;
        self.check_grid(u.grid())?;
        let h2 = self.grid.cell_area();
        if p == Exponent::Finite(2.0) {
            // Parseval: exact for the grid quadrature.
            let mut s = 0.0;
            for c in u.components() {
                let src = c.spectral();
                for &(i, w) in block {
                    s += w * w * src[i].norm_sqr();
                }
            }
            return Ok((h2 * s).sqrt());
        }
        let b = self.block_of(u, j)?;
        let phys: Vec<Vec<f64>> =
            b.components().iter().map(|c| c.physical().into_owned()).collect();
        let mag: Vec<f64> = (0..self.grid.len())
            .map(|i| phys.iter().map(|c| c[i] * c[i]).sum::<f64>().sqrt())
            .collect();
        Ok(lp_of_values(&mag, p.value(), h2))
    }

    /// `2^{js}`-weighted block norms aggregated in `ℓ^r`.
    pub fn besov_norm<F: Field>(&self, u: &F, params: BesovParams) -> Result<f64> {
        let mut terms = Vec::new();
        for j in self.indices() {
            let b = self.block_norm(u, j, params.p)?;
            terms.push((j as f64 * params.s).exp2() * b);
        }
        Ok(match params.r {
            Exponent::Infinite(_) => terms.iter().cloned().fold(0.0, f64::max),
            Exponent::Finite(r) if r == 1.0 => terms.iter().sum(),
            Exponent::Finite(r) => terms.iter().map(|t| t.powf(r)).sum::<f64>().powf(1.0 / r),
        })
    }

    /// Per-block table `(j, ‖Δ_j u‖₂, ‖Δ_j u‖_p, 2^{js}‖Δ_j u‖_p)`.
    pub fn block_table<F: Field>(&self, u: &F, params: BesovParams) -> Result<Vec<BlockRow>> {
        self.indices()
            .map(|j| {
                let l2 = self.block_norm(u, j, Exponent::Finite(2.0))?;
                let lp = if params.p == Exponent::Finite(2.0) {
                    l2
                } else {
                    self.block_norm(u, j, params.p)?
                };
                Ok(BlockRow { j, block_l2: l2, block_lp: lp, weighted: (j as f64 * params.s).exp2() * lp })
            })
            .collect()
    }

    /// `u − mean(u) − Σ_j Δ_j u` in L²; zero up to round-off on this grid.
    pub fn truncation_residue(&self, u: &ScalarField) -> Result<f64> {
        let mut acc = u.to_spectral().map_spectral(|i, z| if i == 0 { Complex64::new(0.0, 0.0) } else { z });
        for j in self.indices() {
            acc = acc.axpy(-1.0, &self.block_of(u, j)?);
        }
        Ok(acc.norm_l2())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BlockRow {
    pub j: i32,
    pub block_l2: f64,
    pub block_lp: f64,
    pub weighted: f64,
}

/// `dyadic_block(u, j)` with a freshly tabulated partition.
pub fn dyadic_block<F: Field>(u: &F, j: i32) -> Result<F> {
    DyadicPartition::new(u.grid()).block_of(u, j)
}

pub fn besov_norm<F: Field>(u: &F, params: BesovParams) -> Result<f64> {
    DyadicPartition::new(u.grid()).besov_norm(u, params)
}

/// Output of [`bony_decompose`].
#[derive(Clone, Debug)]
pub struct BonyParts {
    pub t_uv: ScalarField,
    pub t_vu: ScalarField,
    pub remainder: ScalarField,
    /// L² norm of what the finite j-range fails to capture of `u` and `v`.
    pub truncation_residue: f64,
}

impl BonyParts {
    pub fn total(&self) -> ScalarField {
        &(&self.t_uv + &self.t_vu) + &self.remainder
    }
}

/// Paraproducts and remainder of `uv`, each dealiased.
///
/// On the torus the low-pass `S_{j-1}` carries the mean, so `T_u v` sees
/// `mean(u)`; the mean-mean product is booked in the remainder, which makes
/// the three pieces sum to `dealias(uv)` exactly.
pub fn bony_decompose(u: &ScalarField, v: &ScalarField) -> Result<BonyParts> {
    if u.grid() != v.grid() {
        return Err(Error::GridMismatch);
    }
    let part = DyadicPartition::new(u.grid());
    let grid = u.grid();
    let idx: Vec<i32> = part.indices().collect();
    let phys = |f: ScalarField| f.into_physical_vec();
    let du: Vec<Vec<f64>> = idx.iter().map(|&j| phys(part.block_of(u, j).unwrap())).collect();
    let dv: Vec<Vec<f64>> = idx.iter().map(|&j| phys(part.block_of(v, j).unwrap())).collect();
    let len = grid.len();
    let mut t_uv = vec![0.0; len];
    let mut t_vu = vec![0.0; len];
    let mut rem = vec![u.mean() * v.mean(); len];
    for (q, &j) in idx.iter().enumerate() {
        let su = phys(part.low_pass(u, j - 1)?);
        let sv = phys(part.low_pass(v, j - 1)?);
        for i in 0..len {
            t_uv[i] += su[i] * dv[q][i];
            t_vu[i] += sv[i] * du[q][i];
        }
        for a in [-1i32, 0, 1] {
            let l = q as i32 + a;
            if l < 0 || l as usize >= idx.len() {
                continue;
            }
            let l = l as usize;
            for i in 0..len {
                rem[i] += du[q][i] * dv[l][i];
            }
        }
    }
    let mk = |v: Vec<f64>| ScalarField::from_physical(grid, v).unwrap().dealias();
    let residue = part.truncation_residue(u)?.hypot(part.truncation_residue(v)?);
    Ok(BonyParts { t_uv: mk(t_uv), t_vu: mk(t_vu), remainder: mk(rem), truncation_residue: residue })
}

/// Time exponent of a mixed `L^q_T(X)` norm.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TimeExponent {
    One,
    Two,
    Infinity,
}

/// Checks that `times` is uniform and returns its step (0 for one sample).
pub fn uniform_step(times: &[f64]) -> Result<f64> {
    if times.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    if times.len() == 1 {
        return Ok(0.0);
    }
    let dt = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    for (k, w) in times.windows(2).enumerate() {
        let width = w[1] - w[0];
        if (width - dt).abs() > 1e-9 * dt.abs().max(1e-300) + 1e-15 {
            return Err(Error::NonUniformMesh { index: k, width, expected: dt });
        }
    }
    Ok(dt)
}

/// Aggregates sampled values over time: trapezoid for `L¹`/`L²`, max for `L^∞`.
pub fn time_aggregate(times: &[f64], values: &[f64], exponent: TimeExponent) -> Result<f64> {
    let dt = uniform_step(times)?;
    if values.len() != times.len() {
        return Err(Error::InvalidArgument("one value per time sample expected".into()));
    }
    Ok(match exponent {
        TimeExponent::Infinity => values.iter().cloned().fold(0.0, f64::max),
        TimeExponent::One => values.windows(2).map(|w| 0.5 * dt * (w[0] + w[1])).sum(),
        TimeExponent::Two => {
            values.windows(2).map(|w| 0.5 * dt * (w[0] * w[0] + w[1] * w[1])).sum::<f64>().sqrt()
        }
    })
}

/// `‖u‖_{L^q_T Ḃ^s_{p,r}}` over a sampled trajectory.
pub fn time_integrated_norm<F: Field>(
    times: &[f64],
    samples: &[F],
    params: BesovParams,
    exponent: TimeExponent,
) -> Result<f64> {
    let first = samples.first().ok_or(Error::EmptyTrajectory)?;
    let part = DyadicPartition::new(first.grid());
    let values: Vec<f64> =
        samples.iter().map(|u| part.besov_norm(u, params)).collect::<Result<_>>()?;
    time_aggregate(times, &values, exponent)
}
