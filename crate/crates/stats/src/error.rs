use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("design matrix is rank deficient")]
    RankDeficient,
    #[error("optimizer did not converge after {iterations} iterations")]
    Nonconvergence { iterations: usize },
    #[error("mixed model needs at least two groups")]
    SingleGroup,
    #[error("coefficient {name:?} diverged (|beta| > 30); data are separated")]
    Separation { name: String },
    #[error("fit has not converged")]
    NotConverged,
    #[error("zero variance in input")]
    DegenerateVariance,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("series is empty")]
    EmptySeries,
    #[error("window must be at least 1")]
    BadWindow,
    #[error("expected 10 SUS items, got {0}")]
    BadItemCount(usize),
    #[error("item {index} = {value} outside 1..=5")]
    OutOfRange { index: usize, value: u8 },
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("invalid design: {0}")]
    BadDesign(String),
    #[error("invalid power spec: {0}")]
    BadPowerSpec(String),
}

impl StatsError {
    /// Short machine-readable identifier.
    pub fn code(&self) -> &'static str {
        match self {
            StatsError::RankDeficient => "rank_deficient",
            StatsError::Nonconvergence { .. } => "nonconvergence",
            StatsError::SingleGroup => "single_group",
            StatsError::Separation { .. } => "separation",
            StatsError::NotConverged => "not_converged",
            StatsError::DegenerateVariance => "degenerate_variance",
            StatsError::LengthMismatch { .. } => "length_mismatch",
            StatsError::EmptySeries => "empty_series",
            StatsError::BadWindow => "bad_window",
            StatsError::BadItemCount(_) => "bad_item_count",
            StatsError::OutOfRange { .. } => "out_of_range",
            StatsError::EmptyDataset => "empty_dataset",
            StatsError::BadDesign(_) => "bad_design",
            StatsError::BadPowerSpec(_) => "bad_power_spec",
        }
    }
}
