//! Append-only JSON-lines event log.
//!
//! Each line is one [`EventRecord`]. A record is acknowledged to the client
//! only after its line, newline included, has been written and synced, so
//! anything after the last newline is an unacknowledged torn write and is
//! discarded when the log is opened.

use std::fs::{File, OpenOptions};
use std::io::{Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use chrono::{NaiveDate, NaiveDateTime};
use coach_core::{ImplementationIntention, JudgmentMeasurement, ReportStatus, StudyCondition};
use serde::{Deserialize, Serialize};

use crate::error::ServiceError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum Event {
    Enrolled { goal_id: String, condition: StudyCondition },
    BehaviorSelected { behavior_id: String, initial_self_efficacy: u8 },
    IntentionSet { intention: ImplementationIntention, study_start: NaiveDate },
    ReminderAcked { reminder_id: String, at: NaiveDateTime },
    #[serde(rename = "report")]
    Reported { day: u8, status: ReportStatus, judgments: Option<JudgmentMeasurement>, at: NaiveDateTime },
    DayClosed { day: u8, at: NaiveDateTime },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub seq: u64,
    pub ts: NaiveDateTime,
    pub trainee_id: String,
    #[serde(flatten)]
    pub event: Event,
}

impl EventRecord {
    pub fn to_line(&self) -> String {
        let mut s = serde_json::to_string(self).expect("event records always serialize");
        s.push('\n');
        s
    }
}

/// Parses log text. Returns the records and the byte length of the
/// complete-line prefix they came from.
pub fn parse_log(text: &str) -> Result<(Vec<EventRecord>, usize), ServiceError> {
    let complete = text.rfind('\n').map_or(0, |i| i + 1);
    let mut records = Vec::new();
    for (i, line) in text[..complete].lines().enumerate() {
        let rec: EventRecord =
            serde_json::from_str(line).map_err(|e| ServiceError::CorruptLog { line: i + 1, reason: e.to_string() })?;
        let expected = records.len() as u64 + 1;
        if rec.seq != expected {
            return Err(ServiceError::CorruptLog { line: i + 1, reason: format!("seq {} where {expected} expected", rec.seq) });
        }
        records.push(rec);
    }
    Ok((records, complete))
}

#[derive(Debug)]
pub struct EventLog {
    path: PathBuf,
    file: File,
    last_seq: u64,
}

impl EventLog {
    /// Opens (creating if needed) the log at `path`, dropping a torn final
    /// line, and returns the records already in it.
    pub fn open(path: &Path) -> Result<(Self, Vec<EventRecord>), ServiceError> {
        let mut file = OpenOptions::new().read(true).append(true).create(true).open(path)?;
        let mut text = String::new();
        file.read_to_string(&mut text)
            .map_err(|e| ServiceError::CorruptLog { line: 0, reason: e.to_string() })?;
        let (records, complete) = parse_log(&text)?;
        if complete < text.len() {
            tracing::warn!(bytes = text.len() - complete, "discarding torn final log line");
            file.set_len(complete as u64)?;
            file.sync_all()?;
        }
        file.seek(SeekFrom::End(0))?;
        let last_seq = records.last().map_or(0, |r| r.seq);
        Ok((Self { path: path.to_path_buf(), file, last_seq }, records))
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn last_seq(&self) -> u64 {
        self.last_seq
    }

    /// Writes and syncs one record. Its `seq` must follow the last one.
    pub fn append(&mut self, rec: &EventRecord) -> std::io::Result<()> {
        assert_eq!(rec.seq, self.last_seq + 1, "event sequence must be contiguous");
        self.file.write_all(rec.to_line().as_bytes())?;
        self.file.sync_data()?;
        self.last_seq = rec.seq;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(seq: u64) -> EventRecord {
        let at = NaiveDate::from_ymd_opt(2024, 5, 1).unwrap().and_hms_opt(9, 0, 0).unwrap();
        EventRecord { seq, ts: at, trainee_id: "t0001".into(), event: Event::DayClosed { day: 1, at } }
    }

    #[test]
    fn line_shape() {
        let v: serde_json::Value = serde_json::from_str(&rec(1).to_line()).unwrap();
        assert_eq!(v["kind"], "day_closed");
        assert_eq!(v["payload"]["day"], 1);
        assert_eq!(v["seq"], 1);
        assert_eq!(v["trainee_id"], "t0001");
    }

    #[test]
    fn gaps_and_garbage_are_corrupt() {
        let text = rec(1).to_line() + &rec(3).to_line();
        assert!(matches!(parse_log(&text), Err(ServiceError::CorruptLog { line: 2, .. })));
        let text = rec(1).to_line() + "{not json}\n" + &rec(2).to_line();
        assert!(matches!(parse_log(&text), Err(ServiceError::CorruptLog { line: 2, .. })));
    }

    #[test]
    fn torn_tail_is_dropped() {
        let full = rec(1).to_line() + &rec(2).to_line();
        let torn = &full[..full.len() - 5];
        let (records, complete) = parse_log(torn).unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(complete, rec(1).to_line().len());

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("events.jsonl");
        std::fs::write(&path, torn).unwrap();
        let (mut log, records) = EventLog::open(&path).unwrap();
        assert_eq!(records.len(), 1);
        log.append(&rec(2)).unwrap();
        drop(log);
        let (_, records) = EventLog::open(&path).unwrap();
        assert_eq!(records, vec![rec(1), rec(2)]);
    }
}
