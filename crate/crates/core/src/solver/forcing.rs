//! Right-hand sides of the linearized Lagrangian systems.
//!
//! Every scheme splits its forcing into the same four slots so callers can
//! inspect the pieces: a pressure correction, a viscous correction, an
//! inertial correction (small-density route only) and the capillary term.
//! The capillary slot is `None` whenever `κ = 0` or `∇ρ₀ = 0`, so the sum
//! in that case is bit-identical to the capillarity-free forcing.

use crate::coefficients::Coefficients;
use crate::error::{Error, Result};
use crate::field::{Field, ScalarField, TensorField, VectorField};
use crate::lagrangian::{capillary_tensor, dealiased_divergence, divide_by_density, lagrangian_capillary_term, JacobianData};
use crate::ops;
use crate::pointwise::{self as pw, TensorValues, VectorValues, M2};

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// `F¹ + F² + F³` of the general route.
    Aux2F,
    /// `F¹ + F² + G³`, `G³ = F³ − F³₀` in expanded form.
    Aux3G,
    /// `H¹ + H² + H³ + H⁴` of the small-density route.
    Aux4H,
    /// `H¹ + H² + H³ + (H⁴ − H⁴₀)`, the latter in expanded form.
    Aux6Outer,
    /// `K`-terms of the difference between a capillary run and the
    /// capillarity-free baseline.
    DiffK,
}

impl Scheme {
    /// Whether the scheme belongs to the general (`1/ρ₀`-weighted) route.
    pub fn is_general(self) -> bool {
        matches!(self, Scheme::Aux2F | Scheme::Aux3G)
    }
}

/// The baseline state a [`Scheme::DiffK`] assembly is measured against.
#[derive(Clone, Copy, Debug)]
pub struct Baseline<'a> {
    pub jac: &'a JacobianData,
    pub w: &'a VectorField,
    pub w_prev: &'a VectorField,
    pub grad_q: &'a VectorField,
}

#[derive(Clone, Copy, Debug)]
pub struct ForcingRequest<'a> {
    pub scheme: Scheme,
    pub coeffs: &'a Coefficients,
    /// Jacobian data of the flow of `v̄` at the forcing time.
    pub jac: &'a JacobianData,
    /// `w̄` at the forcing time.
    pub w: &'a VectorField,
    /// `w̄` one step earlier, for `H¹ = (1 − ρ₀)∂_t w̄`.
    pub w_prev: Option<&'a VectorField>,
    pub dt: f64,
    pub grad_q: &'a VectorField,
    /// Required by [`Scheme::DiffK`] only.
    pub baseline: Option<Baseline<'a>>,
}

/// The assembled slots, all spectral.
#[derive(Clone, Debug)]
pub struct ForcingTerms {
    /// `F¹`, `H²` or `K¹ + (I − ᵗA)∇δP`.
    pub pressure: VectorField,
    /// `F²`, `H³` or `K² + K³`.
    pub viscous: VectorField,
    /// `H¹`; absent on the general route.
    pub inertia: Option<VectorField>,
    /// `F³`, `G³`, `H⁴` or `H⁴ − H⁴₀`; absent when it vanishes identically.
    pub capillary: Option<VectorField>,
}

impl ForcingTerms {
    pub fn total(&self) -> VectorField {
        let mut t = self.pressure.axpy(1.0, &self.viscous);
        if let Some(h) = &self.inertia {
            t = t.axpy(1.0, h);
        }
        if let Some(c) = &self.capillary {
            t = t.axpy(1.0, c);
        }
        t
    }
}

pub fn assemble_forcings(req: &ForcingRequest<'_>) -> Result<ForcingTerms> {
    let c = req.coeffs;
    let grid = c.rho0.grid();
    if req.w.grid() != grid || req.jac.grid() != grid || req.grad_q.grid() != grid {
        return Err(Error::GridMismatch);
    }
    let needs_inertia = matches!(req.scheme, Scheme::Aux4H | Scheme::Aux6Outer | Scheme::DiffK);
    if needs_inertia && (req.w_prev.is_none() || !(req.dt > 0.0)) {
        return Err(Error::InvalidArgument(format!("scheme {:?} needs w_prev and dt > 0", req.scheme)));
    }
    if (req.scheme == Scheme::DiffK) != req.baseline.is_some() {
        return Err(Error::InvalidArgument("a baseline is required by, and only by, the diff_K scheme".into()));
    }
    let mu = c.mu_fn.eval_field(&c.rho0);
    let inertia = |w: &VectorField, w_prev: &VectorField| {
        let one_minus = c.rho0.map_physical(|r| 1.0 - r);
        let dw = w.axpy(-1.0, w_prev).scale(1.0 / req.dt);
        dw.map_components(|x| x.mul_dealiased(&one_minus))
    };
    match req.scheme {
        Scheme::Aux2F | Scheme::Aux3G => {
            let pressure = divide_by_density(&pressure_correction(&req.jac.a, req.grad_q), &c.rho0);
            let viscous = divide_by_density(&viscous_correction(&req.jac.a, req.w, &mu, true), &c.rho0);
            let capillary = if req.scheme == Scheme::Aux2F {
                nonzero(lagrangian_capillary_term(&c.rho0, req.jac, &c.k_fn, c.kappa(), c.rho_floor)?)
            } else {
                capillary_difference(c, &req.jac.a)?.map(|v| divide_by_density(&v, &c.rho0))
            };
            Ok(ForcingTerms { pressure, viscous, inertia: None, capillary })
        }
        Scheme::Aux4H | Scheme::Aux6Outer => {
            let pressure = pressure_correction(&req.jac.a, req.grad_q);
            let viscous = viscous_correction(&req.jac.a, req.w, &mu, false);
            let capillary = if req.scheme == Scheme::Aux4H {
                capillary_divergence(c, &req.jac.a)?
            } else {
                capillary_difference(c, &req.jac.a)?
            };
            Ok(ForcingTerms {
                pressure,
                viscous,
                inertia: Some(inertia(req.w, req.w_prev.unwrap())),
                capillary,
            })
        }
        Scheme::DiffK => {
            let base = req.baseline.unwrap();
            // The request carries the capillary run, the baseline the κ = 0 one.
            let a_k = &req.jac.a;
            let a_0 = &base.jac.a;
            let du = req.w.axpy(-1.0, base.w);
            let du_prev = req.w_prev.unwrap().axpy(-1.0, base.w_prev);
            let dp = req.grad_q.axpy(-1.0, base.grad_q);
            let pressure = k1(a_k, a_0, req.grad_q).axpy(1.0, &pressure_correction(a_0, &dp));
            let viscous = k23(a_k, a_0, req.w, base.w, &mu);
            let capillary = capillary_divergence(c, a_k)?;
            Ok(ForcingTerms { pressure, viscous, inertia: Some(inertia(&du, &du_prev)), capillary })
        }
    }
}

fn nonzero(v: VectorField) -> Option<VectorField> {
    if v.is_exactly_zero() {
        None
    } else {
        Some(v)
    }
}

fn pointwise_vector(a: &TensorField, v: &VectorField, f: impl Fn(&M2, [f64; 2]) -> [f64; 2]) -> VectorField {
    let vp = v.to_physical();
    let vv = VectorValues::of(&vp);
    let av = TensorValues::of(a);
    pw::vector_from_fn(a.grid(), |i| f(&av.at(i), vv.at(i))).dealias()
}

/// `(I − ᵗA)∇Q̄`, dealiased.
fn pressure_correction(a: &TensorField, grad_q: &VectorField) -> VectorField {
    pointwise_vector(a, grad_q, |a, g| {
        let t = pw::apply(&pw::transpose(a), g);
        [g[0] - t[0], g[1] - t[1]]
    })
}

/// `K¹ = −(ᵗA_κ − ᵗA)∇P̄_κ`.
fn k1(a_k: &TensorField, a_0: &TensorField, grad_p_k: &VectorField) -> VectorField {
    let gp = grad_p_k.to_physical();
    let gv = VectorValues::of(&gp);
    let (ak, a0) = (TensorValues::of(a_k), TensorValues::of(a_0));
    pw::vector_from_fn(a_k.grid(), |i| {
        let d = pw::sub(&pw::transpose(&ak.at(i)), &pw::transpose(&a0.at(i)));
        let v = pw::apply(&d, gv.at(i));
        [-v[0], -v[1]]
    })
    .dealias()
}

/// `D_A(z) = Dz·A + ᵗA·ᵗDz`.
#[inline]
fn d_a(dz: &M2, a: &M2) -> M2 {
    let m = pw::mul(dz, a);
    pw::add(&m, &pw::transpose(&m))
}

/// `div[μ(ρ₀)A·D_A(w̄) − c·D(w̄)]` with `c = μ(ρ₀)` on the general route
/// (`F²`, before the `1/ρ₀`) and `c = 1` on the small-density one (`H³`).
fn viscous_correction(a: &TensorField, w: &VectorField, mu: &ScalarField, weighted: bool) -> VectorField {
    let dw = ops::jacobian(w).to_physical();
    let dv = TensorValues::of(&dw);
    let av = TensorValues::of(a);
    let m = mu.physical();
    let t = pw::tensor_from_fn(a.grid(), |i| {
        let (dz, am) = (dv.at(i), av.at(i));
        let inner = pw::scale(&pw::mul(&am, &d_a(&dz, &am)), m[i]);
        let plain = d_a(&dz, &pw::IDENTITY);
        pw::sub(&inner, &if weighted { pw::scale(&plain, m[i]) } else { plain })
    });
    dealiased_divergence(&t)
}

/// `K² + K³ = div[μ(A_κ − A)D_{A_κ}(ū_κ) + μA·D_{A_κ−A}(ū)] + div[μA·D_{A_κ}(δu) − D(δu)]`.
fn k23(a_k: &TensorField, a_0: &TensorField, u_k: &VectorField, u_0: &VectorField, mu: &ScalarField) -> VectorField {
    let duk = ops::jacobian(u_k).to_physical();
    let du0 = ops::jacobian(u_0).to_physical();
    let (dk, d0) = (TensorValues::of(&duk), TensorValues::of(&du0));
    let (ak, a0) = (TensorValues::of(a_k), TensorValues::of(a_0));
    let m = mu.physical();
    let t = pw::tensor_from_fn(a_k.grid(), |i| {
        let (ak, a0, dk, d0) = (ak.at(i), a0.at(i), dk.at(i), d0.at(i));
        let da = pw::sub(&ak, &a0);
        let ddu = pw::sub(&dk, &d0);
        let k2 = pw::add(&pw::mul(&da, &d_a(&dk, &ak)), &pw::mul(&a0, &d_a(&d0, &da)));
        let k3 = pw::mul(&a0, &d_a(&ddu, &ak));
        pw::sub(&pw::scale(&pw::add(&k2, &k3), m[i]), &d_a(&ddu, &pw::IDENTITY))
    });
    dealiased_divergence(&t)
}

/// `H⁴ = −κ div[k(ρ₀)A(ᵗA∇ρ₀)⊗(ᵗA∇ρ₀)]`, or `None` when it vanishes.
fn capillary_divergence(c: &Coefficients, a: &TensorField) -> Result<Option<VectorField>> {
    let Some(grad) = capillary_gradient(c)? else { return Ok(None) };
    let t = capillary_tensor(&c.rho0, &grad, a, &c.k_fn);
    Ok(Some(dealiased_divergence(&t).scale(-c.kappa())))
}

/// `H⁴ − H⁴₀` through
/// `A(ᵗA∇ρ₀)⊗(ᵗA∇ρ₀) − ∇ρ₀⊗∇ρ₀ = A[(ᵗAg)⊗(Bg) + (Bg)⊗g] + (A − I)g⊗g`, `B = ᵗA − I`,
/// which vanishes exactly at `A = I`.
fn capillary_difference(c: &Coefficients, a: &TensorField) -> Result<Option<VectorField>> {
    let Some(grad) = capillary_gradient(c)? else { return Ok(None) };
    let gv = VectorValues::of(&grad);
    let av = TensorValues::of(a);
    let r = c.rho0.physical();
    let t = pw::tensor_from_fn(a.grid(), |i| {
        let (am, g) = (av.at(i), gv.at(i));
        let b = pw::sub(&pw::transpose(&am), &pw::IDENTITY);
        let bg = pw::apply(&b, g);
        let atg = pw::apply(&pw::transpose(&am), g);
        let first = pw::add(&pw::outer(pw::apply(&am, atg), bg), &pw::outer(pw::apply(&am, bg), g));
        let second = pw::outer(pw::apply(&pw::sub(&am, &pw::IDENTITY), g), g);
        pw::scale(&pw::add(&first, &second), c.k_fn.eval(r[i]))
    });
    if t.is_exactly_zero() {
        return Ok(None);
    }
    Ok(Some(dealiased_divergence(&t).scale(-c.kappa())))
}

/// Physical `∇ρ₀`, or `None` when the capillary weight or `∇ρ₀` vanishes.
fn capillary_gradient(c: &Coefficients) -> Result<Option<VectorField>> {
    crate::lagrangian::check_density(&c.rho0, c.rho_floor)?;
    if c.kappa() == 0.0 {
        return Ok(None);
    }
    let grad = ops::gradient(&c.rho0);
    if grad.is_exactly_zero() {
        return Ok(None);
    }
    Ok(Some(grad.to_physical()))
}

/// `H⁴₀ = −κ div[k(ρ₀)∇ρ₀⊗∇ρ₀]`, the time-independent free forcing
/// (spectral zero when it vanishes).
pub fn free_capillary_forcing(c: &Coefficients) -> Result<VectorField> {
    let grid = c.rho0.grid();
    Ok(capillary_divergence(c, &TensorField::identity(grid))?
        .unwrap_or_else(|| VectorField::zeros(grid).to_spectral()))
}
