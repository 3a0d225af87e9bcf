//! In-memory study state, rebuilt by folding the event log.

use std::collections::BTreeMap;

use chrono::{NaiveDate, NaiveDateTime};
use coach_core::{
    build_schedule, materialize_reminders, AckState, Catalog, Dataset, DatasetRow, DailyReport, ImplementationIntention,
    ReminderBook, ReminderInstance, ReportLedger, StudyCondition,
};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{ApiError, ServiceError};
use crate::events::{Event, EventRecord};

/// Identifier of the `index`-th enrollee (zero based).
pub fn trainee_id(index: usize) -> String {
    format!("t{:04}", index + 1)
}

/// Condition of the `index`-th enrollee. Enrollees are taken in blocks of
/// the reference cohort size; each block is a seeded permutation of the
/// reference cell counts, so every full block matches them exactly.
pub fn assign_condition(seed: u64, index: usize) -> StudyCondition {
    let mut block: Vec<StudyCondition> =
        StudyCondition::CELLS.iter().flat_map(|&(c, n)| std::iter::repeat_n(c, n as usize)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((index / block.len()) as u64);
    block.shuffle(&mut rng);
    block[index % block.len()]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraineeRecord {
    pub trainee_id: String,
    pub condition: StudyCondition,
    pub goal_id: String,
    pub behavior_id: Option<String>,
    pub initial_self_efficacy: Option<u8>,
    pub intention: Option<ImplementationIntention>,
    /// Present once onboarding is complete.
    pub ledger: Option<ReportLedger>,
}

impl TraineeRecord {
    fn ledger(&self) -> Result<&ReportLedger, ApiError> {
        self.ledger.as_ref().ok_or_else(|| ApiError::conflict("not_enrolled", "onboarding is not complete"))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct StudyState {
    trainees: BTreeMap<String, TraineeRecord>,
    reminders: ReminderBook,
    last_seq: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReminderView {
    pub id: String,
    pub day: u8,
    pub message: String,
    pub notify_at: NaiveDateTime,
    pub expires_at: NaiveDateTime,
    pub state: AckState,
}

impl ReminderView {
    /// Pending reminders past their window are reported as expired.
    fn at(r: &ReminderInstance, now: NaiveDateTime) -> Self {
        let mut r = r.clone();
        r.refresh(now);
        Self { id: r.id, day: r.day, message: r.message, notify_at: r.notify_at, expires_at: r.expires_at, state: r.ack_state }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LedgerView {
    pub trainee_id: String,
    pub condition: StudyCondition,
    pub goal_id: String,
    pub behavior_id: Option<String>,
    pub initial_self_efficacy: Option<u8>,
    pub intention: Option<ImplementationIntention>,
    pub study_start: Option<NaiveDate>,
    pub current_day: Option<i64>,
    pub entries: Vec<DailyReport>,
    pub reminders: Vec<ReminderView>,
}

impl StudyState {
    pub fn last_seq(&self) -> u64 {
        self.last_seq
    }

    pub fn trainee(&self, id: &str) -> Result<&TraineeRecord, ApiError> {
        self.trainees.get(id).ok_or_else(|| ApiError::unknown_trainee(id))
    }

    pub fn trainees(&self) -> impl Iterator<Item = &TraineeRecord> {
        self.trainees.values()
    }

    pub fn reminders(&self) -> &ReminderBook {
        &self.reminders
    }

    pub fn next_trainee_id(&self) -> String {
        trainee_id(self.trainees.len())
    }

    /// SHA-256 of the canonical JSON form of the state.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(serde_json::to_vec(self).expect("state serializes")))
    }

    /// Applies one event. Every check runs before anything is mutated, so a
    /// rejected event leaves the state untouched.
    pub fn apply(&mut self, catalog: &Catalog, rec: &EventRecord) -> Result<(), ApiError> {
        if rec.seq != self.last_seq + 1 {
            return Err(ApiError::conflict("sequence_gap", format!("event {} after {}", rec.seq, self.last_seq)));
        }
        let id = rec.trainee_id.as_str();
        match &rec.event {
            Event::Enrolled { goal_id, condition } => {
                if id != self.next_trainee_id() {
                    return Err(ApiError::conflict("trainee_id_order", format!("expected {}", self.next_trainee_id())));
                }
                if catalog.goal(goal_id).is_none() {
                    return Err(ApiError::bad_request("unknown_goal", format!("unknown goal {goal_id:?}")));
                }
                self.trainees.insert(
                    id.to_string(),
                    TraineeRecord {
                        trainee_id: id.to_string(),
                        condition: *condition,
                        goal_id: goal_id.clone(),
                        behavior_id: None,
                        initial_self_efficacy: None,
                        intention: None,
                        ledger: None,
                    },
                );
            }
            Event::BehaviorSelected { behavior_id, initial_self_efficacy } => {
                let t = self.trainee(id)?;
                if t.behavior_id.is_some() {
                    return Err(ApiError::conflict("already_selected", "a behavior has already been selected"));
                }
                if !(1..=5).contains(initial_self_efficacy) {
                    return Err(ApiError::bad_request(
                        "bad_self_efficacy",
                        format!("self-efficacy {initial_self_efficacy} outside 1..=5"),
                    ));
                }
                let offered = catalog
                    .candidate_behaviors(&t.goal_id, t.condition.difficulty_arm)
                    .map_err(|e| ApiError::bad_request(e.code(), e.to_string()))?;
                if !offered.iter().any(|b| &b.id == behavior_id) {
                    return Err(ApiError::bad_request("behavior_not_offered", format!("{behavior_id:?} is not among the offered behaviors")));
                }
                let t = self.trainees.get_mut(id).expect("checked above");
                t.behavior_id = Some(behavior_id.clone());
                t.initial_self_efficacy = Some(*initial_self_efficacy);
            }
            Event::IntentionSet { intention, study_start } => {
                let t = self.trainee(id)?;
                let Some(selected) = &t.behavior_id else {
                    return Err(ApiError::conflict("behavior_not_selected", "select a behavior first"));
                };
                if t.intention.is_some() {
                    return Err(ApiError::conflict("already_enrolled", "the intention has already been set"));
                }
                if &intention.behavior_id != selected {
                    return Err(ApiError::bad_request("behavior_mismatch", "intention must name the selected behavior"));
                }
                let behavior = catalog.behavior(selected).expect("selected behaviors come from the catalog");
                let reminders = if t.condition.reminders_on {
                    let schedule = build_schedule(t.condition.reminder_count, t.condition.distribution)
                        .map_err(|e| ApiError::bad_request(e.code(), e.to_string()))?;
                    materialize_reminders(id, &schedule, intention, behavior, *study_start)
                } else {
                    Vec::new()
                };
                self.reminders.insert_all(reminders);
                let t = self.trainees.get_mut(id).expect("checked above");
                t.intention = Some(intention.clone());
                t.ledger = Some(ReportLedger::new(id, *study_start));
            }
            Event::ReminderAcked { reminder_id, at } => {
                self.trainee(id)?;
                match self.reminders.get(reminder_id) {
                    Some(r) if r.trainee_id == id => {}
                    _ => return Err(ApiError::not_found("unknown_reminder", format!("no reminder {reminder_id:?}"))),
                }
                self.reminders.acknowledge(reminder_id, *at)?;
            }
            Event::Reported { day, status, judgments, at } => {
                self.trainee(id)?.ledger()?;
                let ledger = self.trainees.get_mut(id).and_then(|t| t.ledger.as_mut()).expect("checked above");
                ledger.record_report(*day, *status, *judgments, *at)?;
            }
            Event::DayClosed { day, at } => {
                self.trainee(id)?.ledger()?;
                let ledger = self.trainees.get_mut(id).and_then(|t| t.ledger.as_mut()).expect("checked above");
                if !ledger.close_day(*day, *at)? {
                    return Err(ApiError::conflict("day_already_closed", format!("day {day} already has an entry")));
                }
            }
        }
        self.last_seq = rec.seq;
        Ok(())
    }

    /// Days that have ended by `now` without an entry, per trainee.
    pub fn due_closures(&self, now: NaiveDateTime) -> Vec<(String, u8)> {
        let mut due = Vec::new();
        for t in self.trainees.values() {
            if let Some(ledger) = &t.ledger {
                due.extend(ledger.ended_days(now).filter(|&d| ledger.entry(d).is_none()).map(|d| (t.trainee_id.clone(), d)));
            }
        }
        due
    }

    pub fn pending_reminders(&self, id: &str, now: NaiveDateTime) -> Result<Vec<ReminderView>, ApiError> {
        self.trainee(id)?;
        Ok(self.reminders.pending_at(now).filter(|r| r.trainee_id == id).map(|r| ReminderView::at(r, now)).collect())
    }

    pub fn ledger_view(&self, id: &str, now: NaiveDateTime) -> Result<LedgerView, ApiError> {
        let t = self.trainee(id)?;
        Ok(LedgerView {
            trainee_id: t.trainee_id.clone(),
            condition: t.condition,
            goal_id: t.goal_id.clone(),
            behavior_id: t.behavior_id.clone(),
            initial_self_efficacy: t.initial_self_efficacy,
            intention: t.intention.clone(),
            study_start: t.ledger.as_ref().map(|l| l.study_start),
            current_day: t.ledger.as_ref().map(|l| l.current_day(now)),
            entries: t.ledger.iter().flat_map(|l| l.entries().cloned()).collect(),
            reminders: self.reminders.iter().filter(|r| r.trainee_id == id).map(|r| ReminderView::at(r, now)).collect(),
        })
    }

    /// One row per ledger entry, in the simulator's dataset layout. A
    /// reminder counts as acknowledged only when it was seen in its window.
    pub fn export(&self) -> Dataset {
        let mut rows = Vec::new();
        for t in self.trainees.values() {
            let Some(ledger) = &t.ledger else { continue };
            let se = t.initial_self_efficacy.expect("enrolled trainees have rated self-efficacy");
            for rep in ledger.entries() {
                let reminder = self.reminders.get(&coach_core::reminder::reminder_id(&t.trainee_id, rep.day));
                let acked = reminder.is_some_and(|r| r.ack_state == AckState::ActiveAck);
                rows.push(DatasetRow::from_report(rep, t.condition, se, reminder.is_some(), acked));
            }
        }
        Dataset::new(rows)
    }
}

/// Folds a log into state; any rejected event makes the log corrupt.
pub fn replay(catalog: &Catalog, records: &[EventRecord]) -> Result<StudyState, ServiceError> {
    let mut state = StudyState::default();
    for (i, rec) in records.iter().enumerate() {
        state
            .apply(catalog, rec)
            .map_err(|e| ServiceError::CorruptLog { line: i + 1, reason: format!("{}: {}", e.code, e.message) })?;
    }
    Ok(state)
}
