//! Plain (fixed-effects only) logistic regression by Newton-Raphson.
//!
//! Used as the σ_group = 0 reference for the mixed model.

use nalgebra::{DMatrix, DVector};

use crate::design::RegressionDesign;
use crate::error::StatsError;

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + e^x)` without overflow.
pub(crate) fn log1p_exp(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticFit {
    pub beta: Vec<f64>,
    pub se: Vec<f64>,
    pub log_likelihood: f64,
    pub iterations: usize,
}

pub fn logistic_loglik(design: &RegressionDesign, beta: &DVector<f64>) -> f64 {
    let eta = &design.x * beta;
    eta.iter().zip(design.y.iter()).map(|(&e, &y)| y * e - log1p_exp(e)).sum()
}

pub fn fit_logistic(design: &RegressionDesign) -> Result<LogisticFit, StatsError> {
    design.check_rank()?;
    let p = design.n_fixed();
    let mut beta = DVector::zeros(p);
    let mut ll = logistic_loglik(design, &beta);
    for it in 1..=100 {
        let eta = &design.x * &beta;
        let mut grad = DVector::zeros(p);
        let mut info = DMatrix::zeros(p, p);
        for i in 0..design.n_obs() {
            let pr = sigmoid(eta[i]);
            let xi = design.x.row(i).transpose();
            grad += &xi * (design.y[i] - pr);
            info += &xi * xi.transpose() * (pr * (1.0 - pr));
        }
        let step = info.clone().cholesky().ok_or(StatsError::RankDeficient)?.solve(&grad);
        let mut t = 1.0;
        let mut next = &beta + &step * t;
        let mut next_ll = logistic_loglik(design, &next);
        while next_ll < ll - 1e-12 && t > 1e-10 {
            t *= 0.5;
            next = &beta + &step * t;
            next_ll = logistic_loglik(design, &next);
        }
        beta = next;
        if let Some(j) = beta.iter().position(|b| b.abs() > 30.0) {
            return Err(StatsError::Separation { name: design.names[j].clone() });
        }
        let done = (next_ll - ll).abs() < 1e-12 && step.amax() * t < 1e-10;
        ll = next_ll;
        if done || grad.amax() < 1e-10 {
            let cov = info.try_inverse().ok_or(StatsError::RankDeficient)?;
            return Ok(LogisticFit {
                beta: beta.iter().copied().collect(),
                se: (0..p).map(|j| cov[(j, j)].sqrt()).collect(),
                log_likelihood: ll,
                iterations: it,
            });
        }
    }
    Err(StatsError::Nonconvergence { iterations: 100 })
}
