//! Shared vocabulary of the coaching protocol.
//!
//! Every type here serializes as a JSON object with snake_case fields, enums
//! as lowercase strings and wall-clock times as `"HH:MM"`. That format is what
//! the event log, the REST API and the CSV export all agree on.

use std::fmt;
use std::str::FromStr;

use chrono::NaiveTime;
use serde::{Deserialize, Serialize};

use crate::error::DomainError;

/// Length of one study run in days.
pub const STUDY_DAYS: u8 = 28;

/// Which family of context slots a goal's intentions use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SlotFamily {
    /// Eating goals bind to a meal.
    Meal,
    /// Walking goals bind to a part of the day.
    Daypart,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Goal {
    pub id: String,
    pub title: String,
    pub description: String,
    pub slot_family: SlotFamily,
}

/// Difficulty arm of a behavior or of a study condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arm {
    Easy,
    Hard,
    Unassigned,
}

impl Arm {
    pub fn as_str(self) -> &'static str {
        match self {
            Arm::Easy => "easy",
            Arm::Hard => "hard",
            Arm::Unassigned => "unassigned",
        }
    }
}

impl fmt::Display for Arm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Arm {
    type Err = DomainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "easy" => Ok(Arm::Easy),
            "hard" => Ok(Arm::Hard),
            "unassigned" => Ok(Arm::Unassigned),
            other => Err(DomainError::UnknownVariant { kind: "arm", value: other.to_string() }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetBehavior {
    pub id: String,
    pub goal_id: String,
    pub text: String,
    /// Population difficulty, unitless; higher is harder.
    pub difficulty_score: f64,
    pub arm: Arm,
}

/// Meal or part of day the behavior is bound to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ContextSlot {
    Breakfast,
    Lunch,
    Dinner,
    Morning,
    Afternoon,
    Evening,
    Night,
}

impl ContextSlot {
    pub fn family(self) -> SlotFamily {
        match self {
            ContextSlot::Breakfast | ContextSlot::Lunch | ContextSlot::Dinner => SlotFamily::Meal,
            _ => SlotFamily::Daypart,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ContextSlot::Breakfast => "breakfast",
            ContextSlot::Lunch => "lunch",
            ContextSlot::Dinner => "dinner",
            ContextSlot::Morning => "morning",
            ContextSlot::Afternoon => "afternoon",
            ContextSlot::Evening => "evening",
            ContextSlot::Night => "night",
        }
    }

    pub fn for_family(family: SlotFamily) -> &'static [ContextSlot] {
        match family {
            SlotFamily::Meal => &[ContextSlot::Breakfast, ContextSlot::Lunch, ContextSlot::Dinner],
            SlotFamily::Daypart => &[
                ContextSlot::Morning,
                ContextSlot::Afternoon,
                ContextSlot::Evening,
                ContextSlot::Night,
            ],
        }
    }
}

impl FromStr for ContextSlot {
    type Err = DomainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "breakfast" => ContextSlot::Breakfast,
            "lunch" => ContextSlot::Lunch,
            "dinner" => ContextSlot::Dinner,
            "morning" => ContextSlot::Morning,
            "afternoon" => ContextSlot::Afternoon,
            "evening" => ContextSlot::Evening,
            "night" => ContextSlot::Night,
            other => {
                return Err(DomainError::UnknownVariant { kind: "context_slot", value: other.to_string() })
            }
        })
    }
}

/// Minutes between the reminder notification and the practice time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u16", into = "u16")]
pub struct ReminderLead(u16);

impl ReminderLead {
    pub const ALLOWED: [u16; 4] = [15, 30, 45, 60];

    pub fn new(minutes: u16) -> Result<Self, DomainError> {
        if Self::ALLOWED.contains(&minutes) {
            Ok(Self(minutes))
        } else {
            Err(DomainError::BadLead(i64::from(minutes)))
        }
    }

    pub fn minutes(self) -> u16 {
        self.0
    }
}

impl TryFrom<u16> for ReminderLead {
    type Error = DomainError;

    fn try_from(value: u16) -> Result<Self, Self::Error> {
        Self::new(value)
    }
}

impl From<ReminderLead> for u16 {
    fn from(lead: ReminderLead) -> u16 {
        lead.0
    }
}

/// `"HH:MM"` (de)serialization for wall-clock times.
pub mod hhmm {
    use chrono::NaiveTime;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn format(t: &NaiveTime) -> String {
        t.format("%H:%M").to_string()
    }

    /// Strict `HH:MM` with two-digit fields.
    pub fn parse(s: &str) -> Option<NaiveTime> {
        let b = s.as_bytes();
        if b.len() != 5 || b[2] != b':' || !b.iter().enumerate().all(|(i, c)| i == 2 || c.is_ascii_digit()) {
            return None;
        }
        let h: u32 = s[0..2].parse().ok()?;
        let m: u32 = s[3..5].parse().ok()?;
        NaiveTime::from_hms_opt(h, m, 0)
    }

    pub fn serialize<S: Serializer>(t: &NaiveTime, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format(t))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<NaiveTime, D::Error> {
        let raw = String::deserialize(d)?;
        parse(&raw).ok_or_else(|| serde::de::Error::custom(format!("bad HH:MM time {raw:?}")))
    }
}

/// The five-slot context binding captured at onboarding. Immutable for the run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImplementationIntention {
    pub behavior_id: String,
    pub context_slot: ContextSlot,
    pub location: String,
    pub person: String,
    #[serde(with = "hhmm")]
    pub specific_time: NaiveTime,
    pub reminder_lead_minutes: ReminderLead,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Distribution {
    Uniform,
    Massed,
    None,
}

impl Distribution {
    pub fn as_str(self) -> &'static str {
        match self {
            Distribution::Uniform => "uniform",
            Distribution::Massed => "massed",
            Distribution::None => "none",
        }
    }
}

impl FromStr for Distribution {
    type Err = DomainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "uniform" => Ok(Distribution::Uniform),
            "massed" => Ok(Distribution::Massed),
            "none" => Ok(Distribution::None),
            other => Err(DomainError::UnknownVariant { kind: "distribution", value: other.to_string() }),
        }
    }
}

/// One cell of the partial-factorial design.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawCondition")]
pub struct StudyCondition {
    pub difficulty_arm: Arm,
    pub reminders_on: bool,
    pub distribution: Distribution,
    pub reminder_count: u8,
}

#[derive(Deserialize)]
struct RawCondition {
    difficulty_arm: Arm,
    reminders_on: bool,
    distribution: Distribution,
    reminder_count: u8,
}

impl TryFrom<RawCondition> for StudyCondition {
    type Error = DomainError;

    fn try_from(r: RawCondition) -> Result<Self, Self::Error> {
        StudyCondition::new(r.difficulty_arm, r.reminders_on, r.distribution, r.reminder_count)
    }
}

impl StudyCondition {
    /// The ten cells in design-table order (hard arm first), with the
    /// number of participants the original deployment had in each.
    pub const CELLS: [(StudyCondition, u32); 10] = [
        (StudyCondition::control(Arm::Hard), 5),
        (StudyCondition::reminded(Arm::Hard, Distribution::Uniform, 7), 7),
        (StudyCondition::reminded(Arm::Hard, Distribution::Uniform, 14), 6),
        (StudyCondition::reminded(Arm::Hard, Distribution::Massed, 7), 5),
        (StudyCondition::reminded(Arm::Hard, Distribution::Massed, 14), 4),
        (StudyCondition::control(Arm::Easy), 7),
        (StudyCondition::reminded(Arm::Easy, Distribution::Uniform, 7), 7),
        (StudyCondition::reminded(Arm::Easy, Distribution::Uniform, 14), 6),
        (StudyCondition::reminded(Arm::Easy, Distribution::Massed, 7), 7),
        (StudyCondition::reminded(Arm::Easy, Distribution::Massed, 14), 6),
    ];

    pub fn new(
        difficulty_arm: Arm,
        reminders_on: bool,
        distribution: Distribution,
        reminder_count: u8,
    ) -> Result<Self, DomainError> {
        if difficulty_arm == Arm::Unassigned {
            return Err(DomainError::BadCondition("difficulty arm must be easy or hard".into()));
        }
        let ok = if reminders_on {
            matches!(reminder_count, 7 | 14) && distribution != Distribution::None
        } else {
            reminder_count == 0 && distribution == Distribution::None
        };
        if !ok {
            return Err(DomainError::BadCondition(format!(
                "reminders_on={reminders_on} incompatible with distribution={} count={reminder_count}",
                distribution.as_str()
            )));
        }
        Ok(Self { difficulty_arm, reminders_on, distribution, reminder_count })
    }

    pub const fn control(arm: Arm) -> Self {
        Self { difficulty_arm: arm, reminders_on: false, distribution: Distribution::None, reminder_count: 0 }
    }

    const fn reminded(arm: Arm, distribution: Distribution, count: u8) -> Self {
        Self { difficulty_arm: arm, reminders_on: true, distribution, reminder_count: count }
    }

    /// Short label such as `hard/massed/14` or `easy/none`.
    pub fn label(&self) -> String {
        if self.reminders_on {
            format!("{}/{}/{}", self.difficulty_arm, self.distribution.as_str(), self.reminder_count)
        } else {
            format!("{}/none", self.difficulty_arm)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportStatus {
    Success,
    Failure,
    Absent,
}

impl ReportStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            ReportStatus::Success => "success",
            ReportStatus::Failure => "failure",
            ReportStatus::Absent => "absent",
        }
    }
}

impl FromStr for ReportStatus {
    type Err = DomainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "success" => Ok(ReportStatus::Success),
            "failure" => Ok(ReportStatus::Failure),
            "absent" => Ok(ReportStatus::Absent),
            other => Err(DomainError::UnknownVariant { kind: "status", value: other.to_string() }),
        }
    }
}

/// The four 1..=5 ordinal judgments collected with each report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawJudgments")]
pub struct JudgmentMeasurement {
    pub difficulty: u8,
    pub self_efficacy: u8,
    pub affective_attitude: u8,
    pub instrumental_attitude: u8,
}

#[derive(Deserialize)]
struct RawJudgments {
    difficulty: u8,
    self_efficacy: u8,
    affective_attitude: u8,
    instrumental_attitude: u8,
}

impl TryFrom<RawJudgments> for JudgmentMeasurement {
    type Error = DomainError;

    fn try_from(r: RawJudgments) -> Result<Self, Self::Error> {
        JudgmentMeasurement::new(r.difficulty, r.self_efficacy, r.affective_attitude, r.instrumental_attitude)
    }
}

impl JudgmentMeasurement {
    pub fn new(
        difficulty: u8,
        self_efficacy: u8,
        affective_attitude: u8,
        instrumental_attitude: u8,
    ) -> Result<Self, DomainError> {
        for (name, v) in [
            ("difficulty", difficulty),
            ("self_efficacy", self_efficacy),
            ("affective_attitude", affective_attitude),
            ("instrumental_attitude", instrumental_attitude),
        ] {
            if !(1..=5).contains(&v) {
                return Err(DomainError::JudgmentOutOfRange { field: name, value: v });
            }
        }
        Ok(Self { difficulty, self_efficacy, affective_attitude, instrumental_attitude })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawReport")]
pub struct DailyReport {
    pub trainee_id: String,
    pub day: u8,
    pub status: ReportStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub judgments: Option<JudgmentMeasurement>,
}

#[derive(Deserialize)]
struct RawReport {
    trainee_id: String,
    day: u8,
    status: ReportStatus,
    #[serde(default)]
    judgments: Option<JudgmentMeasurement>,
}

impl TryFrom<RawReport> for DailyReport {
    type Error = DomainError;

    fn try_from(r: RawReport) -> Result<Self, Self::Error> {
        DailyReport::new(r.trainee_id, r.day, r.status, r.judgments)
    }
}

impl DailyReport {
    pub fn new(
        trainee_id: impl Into<String>,
        day: u8,
        status: ReportStatus,
        judgments: Option<JudgmentMeasurement>,
    ) -> Result<Self, DomainError> {
        if !(1..=STUDY_DAYS).contains(&day) {
            return Err(DomainError::DayOutOfRange(day));
        }
        match (status, &judgments) {
            (ReportStatus::Absent, Some(_)) => return Err(DomainError::UnexpectedJudgments),
            (ReportStatus::Success | ReportStatus::Failure, None) => return Err(DomainError::MissingJudgments),
            _ => {}
        }
        Ok(Self { trainee_id: trainee_id.into(), day, status, judgments })
    }

    pub fn absent(trainee_id: impl Into<String>, day: u8) -> Result<Self, DomainError> {
        Self::new(trainee_id, day, ReportStatus::Absent, None)
    }

    pub fn flags(&self) -> DerivedFlags {
        derive_flags(self.status)
    }
}

/// Binary dependent variables extracted from one day's status.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DerivedFlags {
    pub reported: bool,
    pub completed: bool,
}

pub fn derive_flags(status: ReportStatus) -> DerivedFlags {
    DerivedFlags {
        reported: matches!(status, ReportStatus::Success | ReportStatus::Failure),
        completed: status == ReportStatus::Success,
    }
}
