//! Validation of the onboarding intention wizard.

use serde::{Deserialize, Serialize};

use crate::domain::{hhmm, ContextSlot, ImplementationIntention, ReminderLead, SlotFamily};
use crate::error::IntentionError;

/// Upper bound on free-text fields, in characters.
pub const MAX_TEXT_CHARS: usize = 140;

/// Intention fields as they arrive from the wizard or the API, unvalidated.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawIntention {
    pub behavior_id: String,
    pub context_slot: String,
    pub location: String,
    pub person: String,
    pub specific_time: String,
    pub reminder_lead_minutes: i64,
}

impl From<&ImplementationIntention> for RawIntention {
    fn from(i: &ImplementationIntention) -> Self {
        Self {
            behavior_id: i.behavior_id.clone(),
            context_slot: i.context_slot.as_str().to_string(),
            location: i.location.clone(),
            person: i.person.clone(),
            specific_time: hhmm::format(&i.specific_time),
            reminder_lead_minutes: i64::from(i.reminder_lead_minutes.minutes()),
        }
    }
}

/// Drops control characters, trims, and caps at [`MAX_TEXT_CHARS`].
pub fn sanitize_text(raw: &str) -> String {
    let cleaned: String = raw.chars().filter(|c| !c.is_control()).collect();
    cleaned.trim().chars().take(MAX_TEXT_CHARS).collect::<String>().trim_end().to_string()
}

/// Checks every slot and returns either a well-formed intention or all
/// violated constraints at once.
pub fn validate_intention(
    raw: &RawIntention,
    family: SlotFamily,
) -> Result<ImplementationIntention, Vec<IntentionError>> {
    let mut errors = Vec::new();

    let slot = match raw.context_slot.trim().parse::<ContextSlot>() {
        Ok(s) if s.family() == family => Some(s),
        _ => {
            errors.push(IntentionError::SlotMismatch { slot: raw.context_slot.clone() });
            None
        }
    };

    let location = sanitize_text(&raw.location);
    if location.is_empty() {
        errors.push(IntentionError::EmptyLocation);
    }
    let person = sanitize_text(&raw.person);
    if person.is_empty() {
        errors.push(IntentionError::EmptyPerson);
    }

    let time = hhmm::parse(raw.specific_time.trim());
    if time.is_none() {
        errors.push(IntentionError::BadTime(raw.specific_time.clone()));
    }

    let lead = u16::try_from(raw.reminder_lead_minutes).ok().and_then(|m| ReminderLead::new(m).ok());
    if lead.is_none() {
        errors.push(IntentionError::BadLead(raw.reminder_lead_minutes));
    }

    match (slot, time, lead) {
        (Some(context_slot), Some(specific_time), Some(reminder_lead_minutes)) if errors.is_empty() => {
            Ok(ImplementationIntention {
                behavior_id: raw.behavior_id.clone(),
                context_slot,
                location,
                person,
                specific_time,
                reminder_lead_minutes,
            })
        }
        _ => Err(errors),
    }
}
