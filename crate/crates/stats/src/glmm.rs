//! Random-intercept logistic regression fitted by maximizing the Laplace
//! approximation to the marginal likelihood.
//!
//! The random effect of group `i` is written `b_i = σ·u_i` with
//! `u_i ~ N(0, 1)`, so the integrand is
//! `h_i(u) = Σ_j [y_ij η_ij − log(1 + e^η_ij)] − u²/2`, `η_ij = x_ij·β + σu`,
//! and the Laplace approximation of the group's log marginal is
//! `h_i(û_i) − ½ log(1 + σ² Σ_j w_ij)` with `w = p(1 − p)` at the mode.
//! This form stays well defined at σ = 0, where it equals the plain logistic
//! log-likelihood.
//!
//! The outer problem is solved by BFGS over `(β, log σ)` with an analytic
//! gradient that accounts for the dependence of `û_i` on the parameters.

use nalgebra::{DMatrix, DVector};

use crate::design::RegressionDesign;
use crate::error::StatsError;
use crate::fit::{Coefficient, Family, MixedModelFit};
use crate::glm::{fit_logistic, log1p_exp, sigmoid};
use crate::r2::r2_for;

/// Gradient sup-norm at which the outer optimizer stops.
pub const GRAD_TOL: f64 = 1e-5;
/// Relative log-likelihood gain below which further iterations are noise.
const RESOLUTION: f64 = 1e-12;
const MAX_ITER: usize = 500;
const SEPARATION_GUARD: f64 = 30.0;
/// Lower bound on log σ; below it the random effect is numerically absent.
pub const LOG_SIGMA_MIN: f64 = -20.0;

/// Laplace-approximate marginal log-likelihood and its analytic gradient.
pub struct LaplaceObjective<'a> {
    design: &'a RegressionDesign,
    rows: Vec<Vec<usize>>,
}

#[derive(Debug, Clone)]
pub struct LaplaceEval {
    pub loglik: f64,
    /// Gradient with respect to `(β, log σ)`.
    pub gradient: DVector<f64>,
    /// Conditional modes `û_i` (standardized scale).
    pub modes: Vec<f64>,
}

impl<'a> LaplaceObjective<'a> {
    pub fn new(design: &'a RegressionDesign) -> Self {
        Self { design, rows: design.group_rows() }
    }

    pub fn dim(&self) -> usize {
        self.design.n_fixed() + 1
    }

    /// Mode of `h_i` by safeguarded Newton from `u = 0`.
    fn group_mode(&self, rows: &[usize], eta0: &DVector<f64>, sigma: f64) -> f64 {
        let y = &self.design.y;
        let h = |u: f64| -> f64 {
            rows.iter().map(|&j| {
                let e = eta0[j] + sigma * u;
                y[j] * e - log1p_exp(e)
            }).sum::<f64>() - 0.5 * u * u
        };
        let mut u = 0.0;
        if sigma == 0.0 {
            return u;
        }
        let mut hu = h(u);
        for _ in 0..200 {
            let (mut g, mut curv) = (-u, 1.0);
            for &j in rows {
                let p = sigmoid(eta0[j] + sigma * u);
                g += sigma * (y[j] - p);
                curv += sigma * sigma * p * (1.0 - p);
            }
            let step = g / curv;
            let mut t = 1.0;
            let mut next = u + step;
            let mut h_next = h(next);
            // h is strictly concave, so small Newton steps are safe; value
            // comparisons cannot resolve u much below sqrt(machine epsilon).
            while h_next < hu && step.abs() * t > 1e-4 {
                t *= 0.5;
                next = u + t * step;
                h_next = h(next);
            }
            let moved = (next - u).abs();
            u = next;
            hu = h_next;
            if moved < 1e-12 * (1.0 + u.abs()) || g.abs() < 1e-12 {
                break;
            }
        }
        u
    }

    /// Evaluates at `theta = (β, log σ)`.
    pub fn eval(&self, theta: &[f64]) -> LaplaceEval {
        let p = self.design.n_fixed();
        let beta = DVector::from_column_slice(&theta[..p]);
        let sigma = theta[p].exp();
        let mut eval = self.eval_sigma(&beta, sigma);
        eval.gradient[p] *= sigma;
        eval
    }

    /// Evaluates at `(β, σ)`; the last gradient entry is d/dσ.
    pub fn eval_sigma(&self, beta: &DVector<f64>, sigma: f64) -> LaplaceEval {
        let x = &self.design.x;
        let y = &self.design.y;
        let p = beta.len();
        let eta0 = x * beta;

        let mut loglik = 0.0;
        let mut grad_beta = DVector::zeros(p);
        let mut grad_sigma = 0.0;
        let mut modes = Vec::with_capacity(self.rows.len());

        for rows in &self.rows {
            let u = self.group_mode(rows, &eta0, sigma);
            modes.push(u);

            let mut ell = 0.0;
            let (mut s_r, mut s_w, mut s_w1) = (0.0, 0.0, 0.0);
            let mut x_r = DVector::zeros(p);
            let mut x_w = DVector::zeros(p);
            let mut x_w1 = DVector::zeros(p);
            for &j in rows {
                let e = eta0[j] + sigma * u;
                let pr = sigmoid(e);
                let r = y[j] - pr;
                let w = pr * (1.0 - pr);
                let w1 = w * (1.0 - 2.0 * pr);
                ell += y[j] * e - log1p_exp(e);
                s_r += r;
                s_w += w;
                s_w1 += w1;
                let xj = x.row(j).transpose();
                x_r.axpy(r, &xj, 1.0);
                x_w.axpy(w, &xj, 1.0);
                x_w1.axpy(w1, &xj, 1.0);
            }
            let s2 = sigma * sigma;
            let hess = 1.0 + s2 * s_w;
            loglik += ell - 0.5 * u * u - 0.5 * hess.ln();

            // implicit derivatives of the mode
            let du_dbeta = &x_w * (-sigma / hess);
            let du_dsigma = (s_r - sigma * u * s_w) / hess;
            // total derivatives of the curvature term
            let dh_dbeta = (&x_w1 + &du_dbeta * (sigma * s_w1)) * s2;
            let dh_dsigma = 2.0 * sigma * s_w + s2 * s_w1 * (u + sigma * du_dsigma);

            grad_beta += &x_r - dh_dbeta * (0.5 / hess);
            grad_sigma += u * s_r - 0.5 * dh_dsigma / hess;
        }

        let mut gradient = DVector::zeros(p + 1);
        gradient.rows_mut(0, p).copy_from(&grad_beta);
        gradient[p] = grad_sigma;
        LaplaceEval { loglik, gradient, modes }
    }
}

/// Laplace marginal log-likelihood at `(β, log σ)`.
pub fn laplace_loglik(design: &RegressionDesign, beta: &[f64], log_sigma: f64) -> f64 {
    let mut theta = beta.to_vec();
    theta.push(log_sigma);
    LaplaceObjective::new(design).eval(&theta).loglik
}

/// Analytic gradient of [`laplace_loglik`] with respect to `(β, log σ)`.
pub fn laplace_gradient(design: &RegressionDesign, beta: &[f64], log_sigma: f64) -> Vec<f64> {
    let mut theta = beta.to_vec();
    theta.push(log_sigma);
    LaplaceObjective::new(design).eval(&theta).gradient.iter().copied().collect()
}

/// Population-level probabilities `sigmoid(Xβ)` (random effect at zero).
pub fn predict_population(design: &RegressionDesign, beta: &[f64]) -> Vec<f64> {
    let eta = &design.x * DVector::from_column_slice(beta);
    eta.iter().map(|&e| sigmoid(e)).collect()
}

/// Optimizer output before inference.
struct Optimum {
    theta: Vec<f64>,
    loglik: f64,
    iterations: usize,
}

fn projected(theta: &[f64], g: &DVector<f64>) -> DVector<f64> {
    let mut pg = g.clone();
    let k = theta.len() - 1;
    if theta[k] <= LOG_SIGMA_MIN && pg[k] < 0.0 {
        pg[k] = 0.0;
    }
    pg
}

fn bfgs(obj: &LaplaceObjective<'_>, start: Vec<f64>) -> Result<Optimum, StatsError> {
    let n = start.len();
    let p = n - 1;
    let mut theta = start;
    let mut cur = obj.eval(&theta);
    let h_start = initial_inverse_hessian(obj, &theta, &cur);
    let mut h_inv = h_start.clone();

    for iter in 0..MAX_ITER {
        let pg = projected(&theta, &cur.gradient);
        if pg.amax() < GRAD_TOL {
            return Ok(Optimum { theta, loglik: cur.loglik, iterations: iter });
        }
        // ascent direction on the log-likelihood
        let mut dir = &h_inv * &pg;
        if dir.dot(&pg) <= 0.0 {
            h_inv = h_start.clone();
            dir = &h_inv * &pg;
        }
        // Predicted remaining gain at the resolution of the summed
        // log-likelihood: a covariate on a large raw scale (day 1..28) can
        // keep its gradient component above GRAD_TOL at the floating-point
        // optimum.
        if 0.5 * dir.dot(&pg) < RESOLUTION * cur.loglik.abs().max(1.0) {
            return Ok(Optimum { theta, loglik: cur.loglik, iterations: iter });
        }
        let longest = dir.amax();
        if longest > 5.0 {
            dir *= 5.0 / longest;
        }

        let slope = dir.dot(&pg);
        let mut t = 1.0;
        let (next_theta, next) = loop {
            let mut cand: Vec<f64> = theta.iter().zip(dir.iter()).map(|(a, d)| a + t * d).collect();
            cand[p] = cand[p].max(LOG_SIGMA_MIN);
            let e = obj.eval(&cand);
            if e.loglik.is_finite() && e.loglik >= cur.loglik + 1e-4 * t * slope {
                break (cand, e);
            }
            t *= 0.5;
            if t < 1e-14 {
                return Err(StatsError::Nonconvergence { iterations: iter });
            }
        };

        let s = DVector::from_iterator(n, next_theta.iter().zip(theta.iter()).map(|(a, b)| a - b));
        // BFGS on the negative log-likelihood: y = ∇f_new − ∇f_old = −(g_new − g_old)
        let yv = &cur.gradient - &next.gradient;
        let sy = s.dot(&yv);
        if sy > 1e-12 {
            let rho = 1.0 / sy;
            let eye = DMatrix::<f64>::identity(n, n);
            let left = &eye - &s * yv.transpose() * rho;
            let right = &eye - &yv * s.transpose() * rho;
            h_inv = &left * &h_inv * &right + &s * s.transpose() * rho;
        }

        theta = next_theta;
        cur = next;
        if let Some(j) = theta[..p].iter().position(|b| b.abs() > SEPARATION_GUARD) {
            return Err(StatsError::Separation { name: obj.design.names[j].clone() });
        }
    }
    Err(StatsError::Nonconvergence { iterations: MAX_ITER })
}

/// Block-diagonal start for the BFGS inverse Hessian: the logistic
/// information at the start point for β, and a finite-difference curvature
/// for log σ. Covariates on very different scales (day 1..28 next to 0/1
/// dummies) otherwise leave the first iterations badly conditioned.
fn initial_inverse_hessian(obj: &LaplaceObjective<'_>, theta: &[f64], at: &LaplaceEval) -> DMatrix<f64> {
    let n = theta.len();
    let p = n - 1;
    let x = &obj.design.x;
    let eta = x * DVector::from_column_slice(&theta[..p]);
    let mut info = DMatrix::<f64>::zeros(p, p);
    for i in 0..x.nrows() {
        let pr = sigmoid(eta[i]);
        let xi = x.row(i).transpose();
        info += &xi * xi.transpose() * (pr * (1.0 - pr));
    }
    let mut h = DMatrix::<f64>::identity(n, n);
    if let Some(inv) = info.try_inverse() {
        h.view_mut((0, 0), (p, p)).copy_from(&inv);
    }
    let step = 1e-4;
    let mut shifted = theta.to_vec();
    shifted[p] += step;
    let curvature = (obj.eval(&shifted).gradient[p] - at.gradient[p]) / step;
    if curvature < -1e-8 {
        h[(p, p)] = -1.0 / curvature;
    }
    h
}

/// Observed information for β at fixed σ, by central differences of the
/// analytic gradient.
fn beta_information(obj: &LaplaceObjective<'_>, theta: &[f64]) -> DMatrix<f64> {
    let p = theta.len() - 1;
    let mut info = DMatrix::zeros(p, p);
    for k in 0..p {
        let h = 1e-5 * theta[k].abs().max(1.0);
        let mut plus = theta.to_vec();
        plus[k] += h;
        let mut minus = theta.to_vec();
        minus[k] -= h;
        let gp = obj.eval(&plus).gradient;
        let gm = obj.eval(&minus).gradient;
        for j in 0..p {
            info[(j, k)] = -(gp[j] - gm[j]) / (2.0 * h);
        }
    }
    (&info + info.transpose()) * 0.5
}

pub fn fit_glmm_logistic(design: &RegressionDesign) -> Result<MixedModelFit, StatsError> {
    if design.n_groups() < 2 {
        return Err(StatsError::SingleGroup);
    }
    if !design.is_binary() {
        return Err(StatsError::BadDesign("logistic response must be 0/1".into()));
    }
    design.check_rank()?;

    let obj = LaplaceObjective::new(design);
    let p = design.n_fixed();
    let mut start = vec![0.0; p];
    start.push(0.0); // σ = 1
    let opt = bfgs(&obj, start)?;

    // σ = 0 boundary: the Laplace objective there is the plain logistic
    // likelihood, whose maximizer Newton finds exactly.
    let boundary = fit_logistic(design).ok().filter(|b| b.log_likelihood >= opt.loglik);

    let (beta, sigma, loglik, ses) = match boundary {
        Some(b) => (b.beta.clone(), 0.0, b.log_likelihood, b.se.clone()),
        None => {
            let info = beta_information(&obj, &opt.theta);
            let cov = info.try_inverse().ok_or(StatsError::RankDeficient)?;
            let ses = (0..p).map(|j| cov[(j, j)].max(0.0).sqrt()).collect();
            let sigma = opt.theta[p].exp();
            let sigma = if opt.theta[p] <= LOG_SIGMA_MIN { 0.0 } else { sigma };
            (opt.theta[..p].to_vec(), sigma, opt.loglik, ses)
        }
    };

    let coefficients = design
        .names
        .iter()
        .zip(beta.iter().zip(&ses))
        .map(|(name, (&b, &se))| Coefficient::new(name.clone(), b, se))
        .collect();
    let sigma_group2 = sigma * sigma;
    let (r2m, r2c) = r2_for(Family::Binomial, design, &beta, sigma_group2, None);

    Ok(MixedModelFit {
        family: Family::Binomial,
        coefficients,
        sigma_group2,
        sigma_resid2: None,
        log_likelihood: loglik,
        r2m,
        r2c,
        converged: true,
        iterations: opt.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> RegressionDesign {
        let y = vec![1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 1.0, 0.0];
        let x: Vec<f64> = (0..12).map(|i| (i % 4) as f64).collect();
        let g: Vec<usize> = (0..12).map(|i| i / 4).collect();
        RegressionDesign::with_intercept(y, vec![("x".into(), x)], &g).unwrap()
    }

    #[test]
    fn null_model_predicts_half() {
        let d = tiny();
        assert!(predict_population(&d, &[0.0, 0.0]).iter().all(|&p| p == 0.5));
        let ll = laplace_loglik(&d, &[0.0, 0.0], LOG_SIGMA_MIN);
        assert!((ll - 12.0 * 0.5f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn zero_sigma_matches_logistic_likelihood() {
        let d = tiny();
        let obj = LaplaceObjective::new(&d);
        let beta = DVector::from_vec(vec![0.3, -0.2]);
        let e = obj.eval_sigma(&beta, 0.0);
        assert!((e.loglik - crate::glm::logistic_loglik(&d, &beta)).abs() < 1e-12);
    }

    #[test]
    fn gradient_matches_differences() {
        let d = tiny();
        let obj = LaplaceObjective::new(&d);
        let theta = [0.4, -0.3, 0.2];
        let g = obj.eval(&theta).gradient;
        for k in 0..3 {
            let h = 1e-6;
            let mut a = theta;
            a[k] += h;
            let mut b = theta;
            b[k] -= h;
            let fd = (obj.eval(&a).loglik - obj.eval(&b).loglik) / (2.0 * h);
            assert!((fd - g[k]).abs() < 1e-6 * (1.0 + fd.abs()), "k={k} fd={fd} g={}", g[k]);
        }
    }

    #[test]
    fn single_group_and_non_binary_rejected() {
        let d = RegressionDesign::with_intercept(vec![1.0, 0.0], vec![], &[0, 0]).unwrap();
        assert_eq!(fit_glmm_logistic(&d), Err(StatsError::SingleGroup));
        let d = RegressionDesign::with_intercept(vec![1.0, 0.5], vec![], &[0, 1]).unwrap();
        assert!(matches!(fit_glmm_logistic(&d), Err(StatsError::BadDesign(_))));
    }

    #[test]
    fn fit_improves_on_null_start() {
        let d = tiny();
        let fit = fit_glmm_logistic(&d).unwrap();
        assert!(fit.log_likelihood >= laplace_loglik(&d, &[0.0, 0.0], 0.0));
        assert!(fit.r2m <= fit.r2c);
    }
}
