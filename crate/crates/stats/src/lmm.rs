//! Linear mixed model with a random intercept, fitted by maximum likelihood.
//!
//! With `λ = σ²_group / σ²` fixed, the GLS estimate of β and the residual
//! variance have closed forms, leaving a one-dimensional profile over λ.
//! Each group's covariance `I + λ11ᵀ` is inverted in closed form, so one
//! profile evaluation costs O(G·p²) after a single pass over the data.

use nalgebra::{DMatrix, DVector};

use crate::design::RegressionDesign;
use crate::error::StatsError;
use crate::fit::{Coefficient, Family, MixedModelFit};
use crate::r2::r2_for;

const MAX_ITER: usize = 500;
const LOGLIK_TOL: f64 = 1e-8;

struct GroupSums {
    n: f64,
    xtx: DMatrix<f64>,
    xty: DVector<f64>,
    sx: DVector<f64>,
    sy: f64,
}

struct Profile<'a> {
    design: &'a RegressionDesign,
    groups: Vec<GroupSums>,
    xtx: DMatrix<f64>,
    xty: DVector<f64>,
}

struct ProfilePoint {
    loglik: f64,
    beta: DVector<f64>,
    sigma2: f64,
    a: DMatrix<f64>,
}

impl<'a> Profile<'a> {
    fn new(design: &'a RegressionDesign) -> Self {
        let p = design.n_fixed();
        let groups = design
            .group_rows()
            .into_iter()
            .map(|rows| {
                let mut g = GroupSums {
                    n: rows.len() as f64,
                    xtx: DMatrix::zeros(p, p),
                    xty: DVector::zeros(p),
                    sx: DVector::zeros(p),
                    sy: 0.0,
                };
                for &i in &rows {
                    let xi = design.x.row(i).transpose();
                    let yi = design.y[i];
                    g.xtx += &xi * xi.transpose();
                    g.xty += &xi * yi;
                    g.sx += &xi;
                    g.sy += yi;
                }
                g
            })
            .collect();
        let xtx = design.x.transpose() * &design.x;
        let xty = design.x.transpose() * &design.y;
        Self { design, groups, xtx, xty }
    }

    /// Profiled log-likelihood at variance ratio `ratio`.
    fn eval(&self, ratio: f64) -> Result<ProfilePoint, StatsError> {
        let mut a = self.xtx.clone();
        let mut b = self.xty.clone();
        let mut log_det = 0.0;
        for g in &self.groups {
            let c = ratio / (1.0 + g.n * ratio);
            a -= &g.sx * g.sx.transpose() * c;
            b -= &g.sx * (c * g.sy);
            log_det += (g.n * ratio).ln_1p();
        }
        let chol = a.clone().cholesky().ok_or(StatsError::RankDeficient)?;
        let beta = chol.solve(&b);

        let resid = &self.design.y - &self.design.x * &beta;
        let mut quad = resid.norm_squared();
        for (g, rows) in self.groups.iter().zip(self.design.group_rows()) {
            let c = ratio / (1.0 + g.n * ratio);
            let s: f64 = rows.iter().map(|&i| resid[i]).sum();
            quad -= c * s * s;
        }
        let n = self.design.n_obs() as f64;
        let sigma2 = (quad / n).max(f64::MIN_POSITIVE);
        let loglik = -0.5 * n * ((2.0 * std::f64::consts::PI * sigma2).ln() + 1.0) - 0.5 * log_det;
        Ok(ProfilePoint { loglik, beta, sigma2, a })
    }
}

/// Maps `s ∈ [0, 1)` onto a variance ratio in `[0, ∞)`.
fn ratio_of(s: f64) -> f64 {
    s / (1.0 - s)
}

pub fn fit_lmm(design: &RegressionDesign) -> Result<MixedModelFit, StatsError> {
    if design.n_groups() < 2 {
        return Err(StatsError::SingleGroup);
    }
    design.check_rank()?;
    let profile = Profile::new(design);

    // Golden-section search over s, keeping the best point seen (including
    // the λ = 0 boundary) so the result never falls below the boundary value.
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (0.0_f64, 1.0 - 1e-9);
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let mut f1 = profile.eval(ratio_of(x1))?.loglik;
    let mut f2 = profile.eval(ratio_of(x2))?.loglik;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < MAX_ITER {
        iterations += 1;
        if (f1 - f2).abs() < LOGLIK_TOL && (hi - lo) < 1e-7 {
            converged = true;
            break;
        }
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = profile.eval(ratio_of(x1))?.loglik;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = profile.eval(ratio_of(x2))?.loglik;
        }
    }
    if !converged {
        return Err(StatsError::Nonconvergence { iterations });
    }

    let interior = profile.eval(ratio_of(0.5 * (lo + hi)))?;
    let boundary = profile.eval(0.0)?;
    let (best, ratio) = if boundary.loglik >= interior.loglik {
        (boundary, 0.0)
    } else {
        (interior, ratio_of(0.5 * (lo + hi)))
    };

    let cov = best.a.clone().try_inverse().ok_or(StatsError::RankDeficient)? * best.sigma2;
    let coefficients = design
        .names
        .iter()
        .enumerate()
        .map(|(j, name)| Coefficient::new(name.clone(), best.beta[j], cov[(j, j)].max(0.0).sqrt()))
        .collect();
    let sigma_group2 = ratio * best.sigma2;
    let beta: Vec<f64> = best.beta.iter().copied().collect();
    let (r2m, r2c) = r2_for(Family::Gaussian, design, &beta, sigma_group2, Some(best.sigma2));

    Ok(MixedModelFit {
        family: Family::Gaussian,
        coefficients,
        sigma_group2,
        sigma_resid2: Some(best.sigma2),
        log_likelihood: best.loglik,
        r2m,
        r2c,
        converged: true,
        iterations,
    })
}
