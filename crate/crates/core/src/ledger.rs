//! Append-only per-trainee daily report ledger.
//!
//! A report may only be filed for the current study day. Past days are
//! closed as absent once they end, and nothing is ever rewritten.

use std::collections::BTreeMap;

use chrono::{NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};

use crate::clock::{day_date, study_day};
use crate::domain::{DailyReport, JudgmentMeasurement, ReportStatus, STUDY_DAYS};
use crate::error::LedgerError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportLedger {
    pub trainee_id: String,
    pub study_start: NaiveDate,
    entries: BTreeMap<u8, DailyReport>,
}

/// A ledger mutation, as recorded for replay.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum LedgerOp {
    Report {
        day: u8,
        status: ReportStatus,
        judgments: Option<JudgmentMeasurement>,
        now: NaiveDateTime,
    },
    Close {
        day: u8,
        now: NaiveDateTime,
    },
}

impl ReportLedger {
    pub fn new(trainee_id: impl Into<String>, study_start: NaiveDate) -> Self {
        Self { trainee_id: trainee_id.into(), study_start, entries: BTreeMap::new() }
    }

    /// Study day of `now`; may fall outside 1..=28.
    pub fn current_day(&self, now: NaiveDateTime) -> i64 {
        study_day(self.study_start, now)
    }

    pub fn entries(&self) -> impl Iterator<Item = &DailyReport> {
        self.entries.values()
    }

    pub fn entry(&self, day: u8) -> Option<&DailyReport> {
        self.entries.get(&day)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn record_report(
        &mut self,
        day: u8,
        status: ReportStatus,
        judgments: Option<JudgmentMeasurement>,
        now: NaiveDateTime,
    ) -> Result<&DailyReport, LedgerError> {
        if !(1..=STUDY_DAYS).contains(&day) {
            return Err(LedgerError::DayOutOfRange(day));
        }
        let current = self.current_day(now);
        let d = i64::from(day);
        if d < current {
            return Err(LedgerError::BackReport { day, current });
        }
        if d > current {
            return Err(LedgerError::FutureReport { day, current });
        }
        if self.entries.contains_key(&day) {
            return Err(LedgerError::DuplicateReport(day));
        }
        let report = DailyReport::new(self.trainee_id.clone(), day, status, judgments)?;
        Ok(self.entries.entry(day).or_insert(report))
    }

    /// Records an absence for `day` unless a report already exists.
    /// Returns whether an entry was added.
    pub fn close_day(&mut self, day: u8, now: NaiveDateTime) -> Result<bool, LedgerError> {
        if !(1..=STUDY_DAYS).contains(&day) {
            return Err(LedgerError::DayOutOfRange(day));
        }
        let day_end = day_date(self.study_start, day + 1).and_hms_opt(0, 0, 0).expect("midnight exists");
        if now < day_end {
            return Err(LedgerError::DayNotOver(day));
        }
        if self.entries.contains_key(&day) {
            return Ok(false);
        }
        self.entries.insert(day, DailyReport::absent(self.trainee_id.clone(), day)?);
        Ok(true)
    }

    /// Days that have ended by `now` (capped at the study length).
    pub fn ended_days(&self, now: NaiveDateTime) -> impl Iterator<Item = u8> {
        let last = (self.current_day(now) - 1).clamp(0, i64::from(STUDY_DAYS));
        1..=u8::try_from(last).expect("clamped")
    }

    pub fn apply(&mut self, op: &LedgerOp) -> Result<(), LedgerError> {
        match *op {
            LedgerOp::Report { day, status, judgments, now } => self.record_report(day, status, judgments, now).map(|_| ()),
            LedgerOp::Close { day, now } => self.close_day(day, now).map(|_| ()),
        }
    }
}
