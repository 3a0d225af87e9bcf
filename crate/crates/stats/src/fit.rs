//! Fitted mixed-model results and Wald inference on them.

use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};
use statrs::function::erf::erfc;

use crate::error::StatsError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Gaussian,
    Binomial,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Coefficient {
    #[serde(skip)]
    pub name: String,
    pub estimate: f64,
    pub se: f64,
    /// Two-sided Wald z-test p-value.
    pub p: f64,
    pub stars: &'static str,
}

impl Coefficient {
    pub fn new(name: impl Into<String>, estimate: f64, se: f64) -> Self {
        let p = wald_p(estimate, se);
        Self { name: name.into(), estimate, se, p, stars: stars(p) }
    }

    pub fn z(&self) -> f64 {
        self.estimate / self.se
    }
}

/// Two-sided p-value of `estimate / se` under a standard normal.
pub fn wald_p(estimate: f64, se: f64) -> f64 {
    if !(se > 0.0) || !se.is_finite() {
        return f64::NAN;
    }
    let z = (estimate / se).abs();
    erfc(z / std::f64::consts::SQRT_2)
}

/// Significance codes `*** 0.001, ** 0.01, * 0.05, . 0.1`.
pub fn stars(p: f64) -> &'static str {
    match p {
        p if p < 0.001 => "***",
        p if p < 0.01 => "**",
        p if p < 0.05 => "*",
        p if p < 0.1 => ".",
        _ => "",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixedModelFit {
    #[serde(skip)]
    pub family: Family,
    #[serde(serialize_with = "coefficients_as_map")]
    pub coefficients: Vec<Coefficient>,
    #[serde(rename = "sigma_group2")]
    pub sigma_group2: f64,
    /// Residual variance; `None` for the logistic model.
    #[serde(rename = "sigma_resid2")]
    pub sigma_resid2: Option<f64>,
    #[serde(rename = "loglik")]
    pub log_likelihood: f64,
    pub r2m: f64,
    pub r2c: f64,
    pub converged: bool,
    #[serde(skip)]
    pub iterations: usize,
}

fn coefficients_as_map<S: Serializer>(coefs: &[Coefficient], s: S) -> Result<S::Ok, S::Error> {
    let mut map = s.serialize_map(Some(coefs.len()))?;
    for c in coefs {
        map.serialize_entry(&c.name, c)?;
    }
    map.end()
}

impl MixedModelFit {
    pub fn coefficient(&self, name: &str) -> Option<&Coefficient> {
        self.coefficients.iter().find(|c| c.name == name)
    }

    pub fn estimates(&self) -> Vec<f64> {
        self.coefficients.iter().map(|c| c.estimate).collect()
    }

    /// Errors unless the optimizer reported convergence.
    pub fn ensure_converged(&self) -> Result<&Self, StatsError> {
        if self.converged {
            Ok(self)
        } else {
            Err(StatsError::NotConverged)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn star_codes() {
        assert_eq!(stars(0.0005), "***");
        assert_eq!(stars(0.001), "**");
        assert_eq!(stars(0.009), "**");
        assert_eq!(stars(0.04), "*");
        assert_eq!(stars(0.07), ".");
        assert_eq!(stars(0.5), "");
    }

    #[test]
    fn wald_reference_points() {
        // z = 1.959964 is the two-sided 5% point
        assert!((wald_p(1.959963985, 1.0) - 0.05).abs() < 1e-8);
        assert!((wald_p(-2.575829304, 1.0) - 0.01).abs() < 1e-8);
        assert_eq!(wald_p(0.0, 1.0), 1.0);
        assert!(wald_p(1.0, 0.0).is_nan());
    }

    #[test]
    fn json_shape() {
        let fit = MixedModelFit {
            family: Family::Binomial,
            coefficients: vec![Coefficient::new("(Intercept)", 0.5, 0.1), Coefficient::new("day", -0.03, 0.01)],
            sigma_group2: 1.2,
            sigma_resid2: None,
            log_likelihood: -900.0,
            r2m: 0.01,
            r2c: 0.4,
            converged: true,
            iterations: 12,
        };
        let v = serde_json::to_value(&fit).unwrap();
        let keys: Vec<_> = v["coefficients"].as_object().unwrap().keys().cloned().collect();
        assert_eq!(keys, ["(Intercept)", "day"]);
        assert_eq!(v["coefficients"]["day"]["stars"], "**");
        assert!(v["sigma_resid2"].is_null());
        for k in ["sigma_group2", "loglik", "r2m", "r2c", "converged"] {
            assert!(v.get(k).is_some(), "{k}");
        }
    }
}
