use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DomainError {
    #[error("unknown {kind} {value:?}")]
    UnknownVariant { kind: &'static str, value: String },
    #[error("reminder lead {0} not in {{15, 30, 45, 60}}")]
    BadLead(i64),
    #[error("invalid study condition: {0}")]
    BadCondition(String),
    #[error("judgment {field} = {value} outside 1..=5")]
    JudgmentOutOfRange { field: &'static str, value: u8 },
    #[error("day {0} outside 1..=28")]
    DayOutOfRange(u8),
    #[error("success/failure reports require judgments")]
    MissingJudgments,
    #[error("absent days carry no judgments")]
    UnexpectedJudgments,
}

/// One violated constraint of a candidate implementation intention.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IntentionError {
    #[error("location is empty")]
    EmptyLocation,
    #[error("person is empty")]
    EmptyPerson,
    #[error("reminder lead {0} not in {{15, 30, 45, 60}}")]
    BadLead(i64),
    #[error("context slot {slot:?} does not belong to the goal's slot family")]
    SlotMismatch { slot: String },
    #[error("time {0:?} is not a valid HH:MM")]
    BadTime(String),
    #[error("behavior {0:?} does not match the selected behavior")]
    BehaviorMismatch(String),
}

impl IntentionError {
    pub fn code(&self) -> &'static str {
        match self {
            IntentionError::EmptyLocation => "empty_location",
            IntentionError::EmptyPerson => "empty_person",
            IntentionError::BadLead(_) => "bad_lead",
            IntentionError::SlotMismatch { .. } => "slot_mismatch",
            IntentionError::BadTime(_) => "bad_time",
            IntentionError::BehaviorMismatch(_) => "behavior_mismatch",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("unknown goal {0:?}")]
    UnknownGoal(String),
    #[error("goal {goal:?} has {found} behaviors, need at least 6")]
    InsufficientCatalog { goal: String, found: usize },
    #[error("reminder count {0} not in {{7, 14}}")]
    BadCount(u8),
    #[error("distribution must be uniform or massed")]
    BadDistribution,
    #[error("catalog invalid: {0}")]
    BadCatalog(String),
}

impl EngineError {
    pub fn code(&self) -> &'static str {
        match self {
            EngineError::UnknownGoal(_) => "unknown_goal",
            EngineError::InsufficientCatalog { .. } => "insufficient_catalog",
            EngineError::BadCount(_) => "bad_count",
            EngineError::BadDistribution => "bad_distribution",
            EngineError::BadCatalog(_) => "bad_catalog",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AckError {
    #[error("unknown reminder {0:?}")]
    UnknownReminder(String),
    #[error("reminder already acknowledged")]
    AlreadyAcked,
    #[error("reminder not yet delivered")]
    TooEarly,
}

impl AckError {
    pub fn code(&self) -> &'static str {
        match self {
            AckError::UnknownReminder(_) => "unknown_reminder",
            AckError::AlreadyAcked => "already_acked",
            AckError::TooEarly => "too_early",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LedgerError {
    #[error("day {day} is before the current day {current}")]
    BackReport { day: u8, current: i64 },
    #[error("day {day} is after the current day {current}")]
    FutureReport { day: u8, current: i64 },
    #[error("day {0} already has a report")]
    DuplicateReport(u8),
    #[error("success/failure reports require judgments")]
    MissingJudgments,
    #[error("absent days carry no judgments")]
    UnexpectedJudgments,
    #[error("day {0} outside 1..=28")]
    DayOutOfRange(u8),
    #[error("day {0} has not ended yet")]
    DayNotOver(u8),
}

impl LedgerError {
    pub fn code(&self) -> &'static str {
        match self {
            LedgerError::BackReport { .. } => "back_report",
            LedgerError::FutureReport { .. } => "future_report",
            LedgerError::DuplicateReport(_) => "duplicate_report",
            LedgerError::MissingJudgments => "missing_judgments",
            LedgerError::UnexpectedJudgments => "unexpected_judgments",
            LedgerError::DayOutOfRange(_) => "day_out_of_range",
            LedgerError::DayNotOver(_) => "day_not_over",
        }
    }
}

impl From<DomainError> for LedgerError {
    fn from(e: DomainError) -> Self {
        match e {
            DomainError::MissingJudgments => LedgerError::MissingJudgments,
            DomainError::UnexpectedJudgments => LedgerError::UnexpectedJudgments,
            DomainError::DayOutOfRange(d) => LedgerError::DayOutOfRange(d),
            // Remaining variants cannot come out of DailyReport::new.
            other => unreachable!("unexpected domain error in ledger: {other}"),
        }
    }
}
