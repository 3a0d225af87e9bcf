//! Marginal and conditional R² for random-intercept models.

use nalgebra::DVector;

use crate::design::RegressionDesign;
use crate::error::StatsError;
use crate::fit::{Family, MixedModelFit};

/// Latent-scale residual variance of the logit link.
pub const LOGISTIC_DIST_VAR: f64 = std::f64::consts::PI * std::f64::consts::PI / 3.0;

/// `(r2m, r2c)` from the three variance components.
pub fn r2_from_components(var_fixed: f64, sigma_group2: f64, sigma_dist2: f64) -> (f64, f64) {
    let denom = var_fixed + sigma_group2 + sigma_dist2;
    if denom <= 0.0 {
        return (0.0, 0.0);
    }
    (var_fixed / denom, (var_fixed + sigma_group2) / denom)
}

/// Sample variance (n − 1 denominator) of the fixed-effect linear predictor.
pub fn fixed_predictor_variance(design: &RegressionDesign, beta: &[f64]) -> f64 {
    let eta = &design.x * DVector::from_column_slice(beta);
    let n = eta.len();
    if n < 2 {
        return 0.0;
    }
    let mean = eta.mean();
    eta.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64
}

pub(crate) fn r2_for(family: Family, design: &RegressionDesign, beta: &[f64], sigma_group2: f64, sigma_resid2: Option<f64>) -> (f64, f64) {
    let var_f = fixed_predictor_variance(design, beta);
    let dist = match family {
        Family::Binomial => LOGISTIC_DIST_VAR,
        Family::Gaussian => sigma_resid2.unwrap_or(0.0),
    };
    r2_from_components(var_f, sigma_group2, dist)
}

pub fn nakagawa_r2(fit: &MixedModelFit, design: &RegressionDesign) -> Result<(f64, f64), StatsError> {
    fit.ensure_converged()?;
    Ok(r2_for(fit.family, design, &fit.estimates(), fit.sigma_group2, fit.sigma_resid2))
}
