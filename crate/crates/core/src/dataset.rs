//! Per-trainee per-day rows shared by the simulator, the service export and
//! the statistics pipeline, with their CSV encoding.

use std::io;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{Arm, DailyReport, Distribution, ReportStatus, StudyCondition};

pub const CSV_HEADER: [&str; 16] = [
    "trainee_id",
    "difficulty_arm",
    "reminders_on",
    "distribution",
    "reminder_count",
    "initial_self_efficacy",
    "day",
    "status",
    "reported",
    "completed",
    "difficulty",
    "self_efficacy",
    "affective",
    "instrumental",
    "reminder_scheduled",
    "reminder_acked",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetRow {
    pub trainee_id: String,
    pub condition: StudyCondition,
    /// Self-efficacy rated when the behavior was picked, 1..=5.
    pub initial_self_efficacy: u8,
    pub day: u8,
    pub status: ReportStatus,
    pub difficulty: Option<u8>,
    pub self_efficacy: Option<u8>,
    pub affective: Option<u8>,
    pub instrumental: Option<u8>,
    pub reminder_scheduled: bool,
    /// Acknowledged inside the active window. Late acknowledgments do not count.
    pub reminder_acked: bool,
}

impl DatasetRow {
    pub fn from_report(
        report: &DailyReport,
        condition: StudyCondition,
        initial_self_efficacy: u8,
        reminder_scheduled: bool,
        reminder_acked: bool,
    ) -> Self {
        let j = report.judgments;
        Self {
            trainee_id: report.trainee_id.clone(),
            condition,
            initial_self_efficacy,
            day: report.day,
            status: report.status,
            difficulty: j.map(|j| j.difficulty),
            self_efficacy: j.map(|j| j.self_efficacy),
            affective: j.map(|j| j.affective_attitude),
            instrumental: j.map(|j| j.instrumental_attitude),
            reminder_scheduled,
            reminder_acked,
        }
    }

    pub fn reported(&self) -> bool {
        self.status != ReportStatus::Absent
    }

    pub fn completed(&self) -> bool {
        self.status == ReportStatus::Success
    }
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] io::Error),
    #[error("missing column {0:?}")]
    MissingColumn(String),
    #[error("row {row}: bad value {value:?} in column {column:?}")]
    BadValue { row: usize, column: &'static str, value: String },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dataset {
    pub rows: Vec<DatasetRow>,
}

impl Dataset {
    pub fn new(rows: Vec<DatasetRow>) -> Self {
        Self { rows }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn write_csv<W: io::Write>(&self, w: W) -> Result<(), DatasetError> {
        let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(w);
        out.write_record(CSV_HEADER)?;
        let opt = |v: Option<u8>| v.map(|x| x.to_string()).unwrap_or_default();
        let bit = |b: bool| if b { "1" } else { "0" }.to_string();
        for r in &self.rows {
            let c = &r.condition;
            out.write_record([
                r.trainee_id.clone(),
                c.difficulty_arm.as_str().to_string(),
                bit(c.reminders_on),
                c.distribution.as_str().to_string(),
                c.reminder_count.to_string(),
                r.initial_self_efficacy.to_string(),
                r.day.to_string(),
                r.status.as_str().to_string(),
                bit(r.reported()),
                bit(r.completed()),
                opt(r.difficulty),
                opt(r.self_efficacy),
                opt(r.affective),
                opt(r.instrumental),
                bit(r.reminder_scheduled),
                bit(r.reminder_acked),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    pub fn read_csv<R: io::Read>(r: R) -> Result<Self, DatasetError> {
        let mut rdr = csv::ReaderBuilder::new().from_reader(r);
        let headers = rdr.headers()?.clone();
        let mut idx = [0usize; CSV_HEADER.len()];
        for (slot, name) in idx.iter_mut().zip(CSV_HEADER) {
            *slot = headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| DatasetError::MissingColumn(name.to_string()))?;
        }

        let mut rows = Vec::new();
        for (n, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let row = n + 1;
            let field = |k: usize| rec.get(idx[k]).unwrap_or("");
            let bad = |k: usize| DatasetError::BadValue { row, column: CSV_HEADER[k], value: field(k).to_string() };
            let int = |k: usize| field(k).parse::<u8>().map_err(|_| bad(k));
            let opt = |k: usize| -> Result<Option<u8>, DatasetError> {
                match field(k) {
                    "" => Ok(None),
                    s => s.parse::<u8>().map(Some).map_err(|_| bad(k)),
                }
            };
            let flag = |k: usize| match field(k) {
                "0" => Ok(false),
                "1" => Ok(true),
                _ => Err(bad(k)),
            };

            let arm: Arm = field(1).parse().map_err(|_| bad(1))?;
            let distribution: Distribution = field(3).parse().map_err(|_| bad(3))?;
            let condition = StudyCondition::new(arm, flag(2)?, distribution, int(4)?).map_err(|_| bad(4))?;
            let status: ReportStatus = field(7).parse().map_err(|_| bad(7))?;
            let parsed = DatasetRow {
                trainee_id: field(0).to_string(),
                condition,
                initial_self_efficacy: int(5)?,
                day: int(6)?,
                status,
                difficulty: opt(10)?,
                self_efficacy: opt(11)?,
                affective: opt(12)?,
                instrumental: opt(13)?,
                reminder_scheduled: flag(14)?,
                reminder_acked: flag(15)?,
            };
            if flag(8)? != parsed.reported() {
                return Err(bad(8));
            }
            if flag(9)? != parsed.completed() {
                return Err(bad(9));
            }
            rows.push(parsed);
        }
        Ok(Self { rows })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::JudgmentMeasurement;
    use proptest::prelude::*;

    fn row(day: u8, status: ReportStatus) -> DatasetRow {
        let report = match status {
            ReportStatus::Absent => DailyReport::absent("t7", day).unwrap(),
            s => DailyReport::new("t7", day, s, Some(JudgmentMeasurement::new(2, 4, 5, 3).unwrap())).unwrap(),
        };
        DatasetRow::from_report(&report, StudyCondition::CELLS[2].0, 4, day % 2 == 0, day == 4)
    }

    #[test]
    fn header_and_row_format() {
        let ds = Dataset::new(vec![row(4, ReportStatus::Success), row(5, ReportStatus::Absent)]);
        let text = ds.to_csv_string();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
        assert_eq!(lines.next().unwrap(), "t7,hard,1,uniform,14,4,4,success,1,1,2,4,5,3,1,1");
        assert_eq!(lines.next().unwrap(), "t7,hard,1,uniform,14,4,5,absent,0,0,,,,,0,0");
    }

    #[test]
    fn missing_column_is_named() {
        let text = "trainee_id,day\nx,1\n";
        match Dataset::read_csv(text.as_bytes()) {
            Err(DatasetError::MissingColumn(c)) => assert_eq!(c, "difficulty_arm"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn inconsistent_flags_rejected() {
        let ds = Dataset::new(vec![row(4, ReportStatus::Success)]);
        let text = ds.to_csv_string().replace("success,1,1", "success,0,1");
        assert!(matches!(Dataset::read_csv(text.as_bytes()), Err(DatasetError::BadValue { column: "reported", .. })));
    }

    proptest! {
        #[test]
        fn csv_round_trip(statuses in prop::collection::vec(0u8..3, 1..40)) {
            let rows: Vec<_> = statuses
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    let status = [ReportStatus::Success, ReportStatus::Failure, ReportStatus::Absent][*s as usize];
                    row((i % 28) as u8 + 1, status)
                })
                .collect();
            let ds = Dataset::new(rows);
            let back = Dataset::read_csv(ds.to_csv_string().as_bytes()).unwrap();
            prop_assert_eq!(back, ds);
        }
    }
}
