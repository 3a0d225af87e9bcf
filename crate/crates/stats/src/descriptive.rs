//! Small descriptive statistics: correlation, trailing moving averages,
//! SUS scoring and report-status proportions.

use std::collections::BTreeMap;

use coach_core::{Dataset, DatasetRow, ReportStatus};
use serde::Serialize;

use crate::error::StatsError;

pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch { left: x.len(), right: y.len() });
    }
    if x.len() < 2 {
        return Err(StatsError::DegenerateVariance);
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::DegenerateVariance);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Trailing mean over the last `window` values; early entries average
/// whatever prefix exists.
pub fn moving_average(series: &[f64], window: usize) -> Result<Vec<f64>, StatsError> {
    if window == 0 {
        return Err(StatsError::BadWindow);
    }
    if series.is_empty() {
        return Err(StatsError::EmptySeries);
    }
    Ok((0..series.len())
        .map(|i| {
            let from = (i + 1).saturating_sub(window);
            let slice = &series[from..=i];
            slice.iter().sum::<f64>() / slice.len() as f64
        })
        .collect())
}

/// System Usability Scale composite, 0..=100. Items are in questionnaire
/// order; odd-numbered items are positively worded.
pub fn sus_composite(items: &[u8]) -> Result<f64, StatsError> {
    if items.len() != 10 {
        return Err(StatsError::BadItemCount(items.len()));
    }
    let mut sum = 0u32;
    for (i, &v) in items.iter().enumerate() {
        if !(1..=5).contains(&v) {
            return Err(StatsError::OutOfRange { index: i + 1, value: v });
        }
        sum += if i % 2 == 0 { u32::from(v) - 1 } else { 5 - u32::from(v) };
    }
    Ok(f64::from(sum) * 2.5)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Proportions {
    pub n: usize,
    pub success: f64,
    pub failure: f64,
    pub absent: f64,
}

/// Grouping keys over the condition columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupBy {
    All,
    Condition,
    DifficultyArm,
    ReminderCount,
    Distribution,
}

impl GroupBy {
    pub fn key(self, row: &DatasetRow) -> String {
        let c = &row.condition;
        match self {
            GroupBy::All => "all".into(),
            GroupBy::Condition => c.label(),
            GroupBy::DifficultyArm => c.difficulty_arm.to_string(),
            GroupBy::ReminderCount => c.reminder_count.to_string(),
            GroupBy::Distribution => c.distribution.as_str().to_string(),
        }
    }
}

pub fn proportions_table(dataset: &Dataset, group_by: GroupBy) -> Result<BTreeMap<String, Proportions>, StatsError> {
    proportions_by(dataset, |r| group_by.key(r))
}

pub fn proportions_by<K: Ord>(
    dataset: &Dataset,
    key: impl Fn(&DatasetRow) -> K,
) -> Result<BTreeMap<K, Proportions>, StatsError> {
    if dataset.is_empty() {
        return Err(StatsError::EmptyDataset);
    }
    let mut counts: BTreeMap<K, [usize; 3]> = BTreeMap::new();
    for r in &dataset.rows {
        let c = counts.entry(key(r)).or_default();
        c[match r.status {
            ReportStatus::Success => 0,
            ReportStatus::Failure => 1,
            ReportStatus::Absent => 2,
        }] += 1;
    }
    Ok(counts
        .into_iter()
        .map(|(k, [s, f, a])| {
            let n = s + f + a;
            let t = n as f64;
            (k, Proportions { n, success: s as f64 / t, failure: f as f64 / t, absent: a as f64 / t })
        })
        .collect())
}
