//! Sample size for chi-square goodness-of-fit tests.
//!
//! Power at sample size `n` is `P(X > c)` where `X` is noncentral
//! chi-square with noncentrality `λ = w²·n` and `c` is the central critical
//! value at level α. The noncentral CDF is the Poisson mixture
//! `Σ_j Pois(j; λ/2) · P(χ²_{df+2j} ≤ x)`, summed outward from the Poisson
//! mode until the neglected mixture mass drops below 1e-12.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma_lr, ln_gamma};

use crate::error::StatsError;

const MIXTURE_TAIL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerSpec {
    /// Cohen's effect size w.
    pub w: f64,
    pub alpha: f64,
    pub df: u32,
    pub power: f64,
}

impl PowerSpec {
    pub fn validate(&self) -> Result<(), StatsError> {
        if !(self.w > 0.0 && self.w.is_finite()) {
            return Err(StatsError::BadPowerSpec(format!("w must be positive, got {}", self.w)));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(StatsError::BadPowerSpec(format!("alpha must be in (0, 1), got {}", self.alpha)));
        }
        if self.df == 0 {
            return Err(StatsError::BadPowerSpec("df must be at least 1".into()));
        }
        if !(self.power > 0.0 && self.power < 1.0) {
            return Err(StatsError::BadPowerSpec(format!("power must be in (0, 1), got {}", self.power)));
        }
        Ok(())
    }
}

/// Central chi-square CDF.
pub fn chisq_cdf(x: f64, df: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        gamma_lr(df / 2.0, x / 2.0)
    }
}

/// Upper-α critical value of the central chi-square, by bisection.
pub fn chisq_critical(df: f64, alpha: f64) -> f64 {
    let target = 1.0 - alpha;
    let mut hi = df.max(1.0);
    while chisq_cdf(hi, df) < target {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if chisq_cdf(mid, df) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Noncentral chi-square CDF with `df` degrees of freedom and
/// noncentrality `lambda`.
pub fn noncentral_chisq_cdf(x: f64, df: f64, lambda: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if lambda <= 0.0 {
        return chisq_cdf(x, df);
    }
    let mu = lambda / 2.0;
    let log_weight = |j: f64| -mu + j * mu.ln() - ln_gamma(j + 1.0);
    let mode = mu.floor();

    let mut total = 0.0;
    let mut mass = 0.0;
    // upward from the mode
    let mut j = mode;
    loop {
        let w = log_weight(j).exp();
        total += w * chisq_cdf(x, df + 2.0 * j);
        mass += w;
        j += 1.0;
        if w < MIXTURE_TAIL * 1e-3 && j > mu {
            break;
        }
    }
    // downward
    let mut j = mode - 1.0;
    while j >= 0.0 {
        let w = log_weight(j).exp();
        total += w * chisq_cdf(x, df + 2.0 * j);
        mass += w;
        if w < MIXTURE_TAIL * 1e-3 {
            break;
        }
        j -= 1.0;
    }
    debug_assert!((1.0 - mass) < MIXTURE_TAIL, "mixture mass {mass}");
    total.clamp(0.0, 1.0)
}

/// Power of the goodness-of-fit test at sample size `n`.
pub fn chisq_power(w: f64, alpha: f64, df: u32, n: u64) -> f64 {
    let df = f64::from(df);
    let crit = chisq_critical(df, alpha);
    1.0 - noncentral_chisq_cdf(crit, df, w * w * n as f64)
}

/// Smallest `n` whose power reaches `spec.power`.
pub fn chisq_power_n(spec: &PowerSpec) -> Result<u64, StatsError> {
    spec.validate()?;
    let df = f64::from(spec.df);
    let crit = chisq_critical(df, spec.alpha);
    let power_at = |n: u64| 1.0 - noncentral_chisq_cdf(crit, df, spec.w * spec.w * n as f64);

    if power_at(1) >= spec.power {
        return Ok(1);
    }
    let mut hi = 2u64;
    while power_at(hi) < spec.power {
        hi = hi.checked_mul(2).ok_or_else(|| StatsError::BadPowerSpec("required n overflows".into()))?;
    }
    let mut lo = hi / 2; // power(lo) < target
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if power_at(mid) >= spec.power {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}
