//! Domain model and protocol engine of the coach: goals and behaviors,
//! implementation intentions, reminder schedules and windows, and the daily
//! report ledger.

pub mod catalog;
pub mod clock;
pub mod dataset;
pub mod domain;
pub mod error;
pub mod intention;
pub mod ledger;
pub mod reminder;
pub mod schedule;

pub use catalog::Catalog;
pub use clock::{Clock, ManualClock, SystemClock};
pub use dataset::{Dataset, DatasetError, DatasetRow};
pub use domain::{
    derive_flags, Arm, ContextSlot, DailyReport, DerivedFlags, Distribution, Goal, ImplementationIntention,
    JudgmentMeasurement, ReminderLead, ReportStatus, SlotFamily, StudyCondition, TargetBehavior, STUDY_DAYS,
};
pub use error::{AckError, DomainError, EngineError, IntentionError, LedgerError};
pub use intention::{validate_intention, RawIntention};
pub use ledger::{LedgerOp, ReportLedger};
pub use reminder::{compose_message, materialize_reminders, AckState, ReminderBook, ReminderInstance};
pub use schedule::{build_schedule, ReminderSchedule};
