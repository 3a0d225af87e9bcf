//! Statistical estimators for the habit-coaching study: random-intercept
//! linear and logistic mixed models, sample-size calculation for
//! chi-square tests, and small descriptive helpers.

pub mod descriptive;
pub mod design;
pub mod error;
pub mod fit;
pub mod glm;
pub mod glmm;
pub mod lmm;
pub mod models;
pub mod power;
pub mod r2;

pub use descriptive::{moving_average, pearson, proportions_by, proportions_table, sus_composite, GroupBy, Proportions};
pub use design::RegressionDesign;
pub use error::StatsError;
pub use fit::{Coefficient, Family, MixedModelFit};
pub use glm::{fit_logistic, LogisticFit};
pub use glmm::fit_glmm_logistic;
pub use lmm::fit_lmm;
pub use models::{fit_models, ModelId, ModelResult, Predictor, Response, SuiteReport};
pub use power::{chisq_power, chisq_power_n, noncentral_chisq_cdf, PowerSpec};
pub use r2::nakagawa_r2;
