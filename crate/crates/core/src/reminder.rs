//! Reminder messages, their active windows, and acknowledgment.

use std::collections::BTreeMap;

use chrono::{Duration, NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};

use crate::clock::day_date;
use crate::domain::{ImplementationIntention, SlotFamily, TargetBehavior};
use crate::error::AckError;
use crate::schedule::ReminderSchedule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AckState {
    Pending,
    /// Acknowledged inside the active window; the message was seen.
    ActiveAck,
    /// Acknowledged after the practice time; the message was not shown.
    LateAck,
    Expired,
}

impl AckState {
    pub fn is_acked(self) -> bool {
        matches!(self, AckState::ActiveAck | AckState::LateAck)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReminderInstance {
    pub id: String,
    pub trainee_id: String,
    pub day: u8,
    pub message: String,
    pub notify_at: NaiveDateTime,
    pub expires_at: NaiveDateTime,
    pub ack_state: AckState,
}

impl ReminderInstance {
    /// Whether `at` falls inside the active window, both ends inclusive.
    pub fn is_active(&self, at: NaiveDateTime) -> bool {
        self.notify_at <= at && at <= self.expires_at
    }

    /// Classifies an acknowledgment at `at` and records it.
    pub fn acknowledge(&mut self, at: NaiveDateTime) -> Result<AckState, AckError> {
        let state = classify_ack(self, at)?;
        self.ack_state = state;
        Ok(state)
    }

    /// Marks an unacknowledged reminder expired once its window has passed.
    pub fn refresh(&mut self, now: NaiveDateTime) {
        if self.ack_state == AckState::Pending && now > self.expires_at {
            self.ack_state = AckState::Expired;
        }
    }
}

/// Pure classification used by [`ReminderInstance::acknowledge`].
pub fn classify_ack(reminder: &ReminderInstance, at: NaiveDateTime) -> Result<AckState, AckError> {
    if reminder.ack_state.is_acked() {
        return Err(AckError::AlreadyAcked);
    }
    if at < reminder.notify_at {
        Err(AckError::TooEarly)
    } else if at <= reminder.expires_at {
        Ok(AckState::ActiveAck)
    } else {
        Ok(AckState::LateAck)
    }
}

/// Renders the reminder text for a behavior bound to an intention.
pub fn compose_message(behavior: &TargetBehavior, intention: &ImplementationIntention) -> String {
    let action = instruction_phrase(&behavior.text);
    let slot = intention.context_slot.as_str();
    let when = match intention.context_slot.family() {
        SlotFamily::Meal => format!("while having {slot}"),
        SlotFamily::Daypart => format!("during the {slot}"),
    };
    format!("Please remember to {action} {when}, at: {}, with: {}", intention.location, intention.person)
}

/// "Chew each bite 10 times." -> "chew each bite 10 times"
fn instruction_phrase(text: &str) -> String {
    let t = text.trim().trim_end_matches('.');
    let mut chars = t.chars();
    match chars.next() {
        Some(first) => first.to_lowercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// One reminder per scheduled day, notifying `lead` minutes before the
/// practice time and expiring at it.
pub fn materialize_reminders(
    trainee_id: &str,
    schedule: &ReminderSchedule,
    intention: &ImplementationIntention,
    behavior: &TargetBehavior,
    study_start: NaiveDate,
) -> Vec<ReminderInstance> {
    let message = compose_message(behavior, intention);
    let lead = Duration::minutes(i64::from(intention.reminder_lead_minutes.minutes()));
    schedule
        .day_vector
        .iter()
        .map(|&day| {
            let expires_at = day_date(study_start, day).and_time(intention.specific_time);
            ReminderInstance {
                id: reminder_id(trainee_id, day),
                trainee_id: trainee_id.to_string(),
                day,
                message: message.clone(),
                notify_at: expires_at - lead,
                expires_at,
                ack_state: AckState::Pending,
            }
        })
        .collect()
}

pub fn reminder_id(trainee_id: &str, day: u8) -> String {
    format!("{trainee_id}-d{day:02}")
}

/// Reminders keyed by id.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReminderBook {
    reminders: BTreeMap<String, ReminderInstance>,
}

impl ReminderBook {
    pub fn insert_all(&mut self, items: impl IntoIterator<Item = ReminderInstance>) {
        for r in items {
            self.reminders.insert(r.id.clone(), r);
        }
    }

    pub fn get(&self, id: &str) -> Option<&ReminderInstance> {
        self.reminders.get(id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &ReminderInstance> {
        self.reminders.values()
    }

    pub fn len(&self) -> usize {
        self.reminders.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reminders.is_empty()
    }

    pub fn acknowledge(&mut self, id: &str, at: NaiveDateTime) -> Result<AckState, AckError> {
        self.reminders
            .get_mut(id)
            .ok_or_else(|| AckError::UnknownReminder(id.to_string()))?
            .acknowledge(at)
    }

    /// Pending reminders whose window contains `now`.
    pub fn pending_at(&self, now: NaiveDateTime) -> impl Iterator<Item = &ReminderInstance> {
        self.reminders.values().filter(move |r| r.ack_state == AckState::Pending && r.is_active(now))
    }

    pub fn refresh(&mut self, now: NaiveDateTime) {
        for r in self.reminders.values_mut() {
            r.refresh(now);
        }
    }
}
