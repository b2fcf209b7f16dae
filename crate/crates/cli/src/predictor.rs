//! Closed-form lower bound `T₀` on the lifespan.

use serde::Serialize;

use crate::error::CliError;

/// Besov norms of the initial velocity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct VelocityNorms {
    /// `‖u₀‖_{Ḃ^{n/p}_{p,1}}`.
    pub critical: f64,
    /// `‖u₀‖_{Ḃ^{n/p+1}_{p,1}}`.
    pub plus_one: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Prediction {
    pub t0: f64,
    /// `(ε/4)/(C‖u₀‖_{+1} + (κ̄/μ̄²)C_ρ₀μ̄)`.
    pub first_branch: f64,
    /// `(ε/4)²μ̄/(C‖u₀‖ + (κ̄/μ̄²)C_ρ₀μ̄)²`.
    pub second_branch: f64,
}

/// `T₀ = (ε/4)·min(1/(C‖u₀‖_{+1} + (κ̄/μ̄²)C_ρ₀μ̄), (ε/4)μ̄/(C‖u₀‖ + (κ̄/μ̄²)C_ρ₀μ̄)²)`.
///
/// Infinite when both denominators vanish (no data and no capillarity).
pub fn lifespan_predictor(
    u0: VelocityNorms,
    c_rho0: f64,
    mu_bar: f64,
    kappa_bar: f64,
    epsilon: f64,
    c: f64,
) -> Result<Prediction, CliError> {
    let positive = [("mu_bar", mu_bar), ("epsilon", epsilon), ("C", c), ("C_rho0", c_rho0)];
    for (name, v) in positive {
        if !(v > 0.0 && v.is_finite()) {
            return Err(CliError::Predictor(format!("{name} = {v} must be positive")));
        }
    }
    let nonneg = [("kappa_bar", kappa_bar), ("|u0|", u0.critical), ("|u0|_+1", u0.plus_one)];
    for (name, v) in nonneg {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(CliError::Predictor(format!("{name} = {v} must be nonnegative")));
        }
    }
    let cap = kappa_bar / (mu_bar * mu_bar) * c_rho0 * mu_bar;
    let q = epsilon / 4.0;
    let d1 = c * u0.plus_one + cap;
    let d2 = c * u0.critical + cap;
    let first_branch = if d1 == 0.0 { f64::INFINITY } else { q / d1 };
    let second_branch = if d2 == 0.0 { f64::INFINITY } else { q * q * mu_bar / (d2 * d2) };
    Ok(Prediction { t0: first_branch.min(second_branch), first_branch, second_branch })
}

#[cfg(test)]
mod tests {
    use super::*;

    const ZERO: VelocityNorms = VelocityNorms { critical: 0.0, plus_one: 0.0 };

    #[test]
    fn capillary_free_limit() {
        let n = VelocityNorms { critical: 0.3, plus_one: 1.1 };
        let p = lifespan_predictor(n, 2.0, 1.5, 0.0, 0.1, 3.0).unwrap();
        let q = 0.025;
        let b1 = q / (3.0 * 1.1);
        let b2 = q * q * 1.5 / (3.0 * 0.3f64).powi(2);
        assert!((p.t0 - b1.min(b2)).abs() <= 1e-15 * b1.min(b2));
    }

    #[test]
    fn zero_velocity_branch_scales_like_mu_over_kappa() {
        let p1 = lifespan_predictor(ZERO, 2.0, 1.5, 0.01, 0.1, 1.0).unwrap();
        let p2 = lifespan_predictor(ZERO, 2.0, 1.5, 0.02, 0.1, 1.0).unwrap();
        assert!((p1.first_branch / p2.first_branch - 2.0).abs() < 1e-12);
        // (ε/4)/(κ̄C_ρ₀/μ̄)
        assert!((p1.first_branch - 0.025 * 1.5 / (0.01 * 2.0)).abs() < 1e-12);
        assert!(p1.t0.is_finite());
    }

    #[test]
    fn no_data_no_capillarity_is_unbounded() {
        let p = lifespan_predictor(ZERO, 1.0, 1.0, 0.0, 0.1, 1.0).unwrap();
        assert!(p.t0.is_infinite());
    }

    #[test]
    fn rejects_nonpositive_inputs() {
        assert!(lifespan_predictor(ZERO, 1.0, 0.0, 0.1, 0.1, 1.0).is_err());
        assert!(lifespan_predictor(ZERO, 1.0, 1.0, -0.1, 0.1, 1.0).is_err());
        assert!(lifespan_predictor(ZERO, 0.0, 1.0, 0.1, 0.1, 1.0).is_err());
    }
}
