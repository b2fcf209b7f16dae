//! Least-squares power laws `y = e^b x^a`.

use serde::Serialize;

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// `(ln x, ln y)` pairs the fit was computed from.
    pub points: Vec<(f64, f64)>,
}

/// Fits `ln y = slope·ln x + intercept`.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<FitResult, CliError> {
    if points.len() < 3 {
        return Err(CliError::Fit(format!("need at least 3 points, got {}", points.len())));
    }
    if let Some(&(x, y)) = points.iter().find(|&&(x, y)| !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite())) {
        return Err(CliError::Fit(format!("nonpositive or non-finite point ({x}, {y})")));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = logs.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(CliError::Fit("all x values coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) };
    Ok(FitResult { slope, intercept, r_squared, points: logs })
}
