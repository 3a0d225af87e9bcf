use serde::{Deserialize, Serialize};

use crate::error::SimError;

/// Parameters of the synthetic trainee. Defaults are calibration targets
/// that reproduce the qualitative study findings, not estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TraineeParams {
    /// Baseline log-odds that the context retrieves the goal.
    pub a0: f64,
    /// Association increment per reminder acknowledged while active.
    pub delta: f64,
    /// Daily retention factor of the association.
    pub lambda: f64,
    /// Per-day drift in engagement; drives dropout.
    pub rho: f64,
    /// Probability that an active reminder is acknowledged.
    pub q: f64,
    /// Maps behavior difficulty score to initial latent ease.
    pub e0_scale: f64,
    /// Ease gained per success.
    pub eta_s: f64,
    /// Ease lost per failure.
    pub eta_f: f64,
    /// Standard deviation of judgment noise.
    pub sigma_j: f64,
    /// Judgment slope on ease.
    pub k: f64,
    pub seed: u64,
}

impl Default for TraineeParams {
    fn default() -> Self {
        Self {
            a0: 0.5,
            delta: 2.0,
            lambda: 0.85,
            rho: 0.06,
            q: 0.35,
            e0_scale: 1.5,
            eta_s: 0.05,
            eta_f: 0.08,
            sigma_j: 0.3,
            k: 1.5,
            seed: 8,
        }
    }
}

impl TraineeParams {
    /// Reads overrides from TOML; missing keys keep their defaults.
    pub fn from_toml_str(s: &str) -> Result<Self, SimError> {
        let p: Self = toml::from_str(s).map_err(|e| SimError::Config(e.to_string()))?;
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |name: &'static str, reason: &str| Err(SimError::InvalidParam { name, reason: reason.into() });
        for (name, v) in [
            ("a0", self.a0),
            ("delta", self.delta),
            ("lambda", self.lambda),
            ("rho", self.rho),
            ("q", self.q),
            ("e0_scale", self.e0_scale),
            ("eta_s", self.eta_s),
            ("eta_f", self.eta_f),
            ("sigma_j", self.sigma_j),
            ("k", self.k),
        ] {
            if !v.is_finite() {
                return bad(name, "must be finite");
            }
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return bad("lambda", "must be in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.q) {
            return bad("q", "must be in [0, 1]");
        }
        for (name, v) in [("delta", self.delta), ("eta_s", self.eta_s), ("eta_f", self.eta_f), ("sigma_j", self.sigma_j)] {
            if v < 0.0 {
                return bad(name, "must be non-negative");
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_overrides_and_defaults() {
        let p = TraineeParams::from_toml_str("q = 0.5\nseed = 7\n").unwrap();
        assert_eq!(p.q, 0.5);
        assert_eq!(p.seed, 7);
        assert_eq!(p.delta, TraineeParams::default().delta);
        assert_eq!(TraineeParams::from_toml_str("").unwrap(), TraineeParams::default());
    }

    #[test]
    fn invalid_values_rejected() {
        assert!(matches!(TraineeParams::from_toml_str("lambda = 1.5"), Err(SimError::InvalidParam { name: "lambda", .. })));
        assert!(matches!(TraineeParams::from_toml_str("q = -0.1"), Err(SimError::InvalidParam { name: "q", .. })));
        assert!(matches!(TraineeParams::from_toml_str("sigma_j = -1"), Err(SimError::InvalidParam { .. })));
        assert!(matches!(TraineeParams::from_toml_str("bogus = 1"), Err(SimError::Config(_))));
    }
}
