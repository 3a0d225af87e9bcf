//! Injected wall clock. Day boundaries are local midnight of the trainee's
//! wall clock; there is no timezone handling.

use std::sync::{Arc, Mutex};

use chrono::{Local, NaiveDate, NaiveDateTime};

pub trait Clock: Send + Sync {
    fn now(&self) -> NaiveDateTime;
}

#[derive(Debug, Default, Clone, Copy)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> NaiveDateTime {
        Local::now().naive_local()
    }
}

/// A clock that only moves when told to. Clones share the same time.
#[derive(Debug, Clone)]
pub struct ManualClock(Arc<Mutex<NaiveDateTime>>);

impl ManualClock {
    pub fn new(start: NaiveDateTime) -> Self {
        Self(Arc::new(Mutex::new(start)))
    }

    pub fn set(&self, t: NaiveDateTime) {
        *self.0.lock().expect("clock poisoned") = t;
    }

    pub fn advance(&self, by: chrono::Duration) {
        let mut t = self.0.lock().expect("clock poisoned");
        *t += by;
    }
}

impl Clock for ManualClock {
    fn now(&self) -> NaiveDateTime {
        *self.0.lock().expect("clock poisoned")
    }
}

/// Study day (1-based) that `now` falls on for a run starting `start`.
/// Values outside 1..=28 mean before or after the run.
pub fn study_day(start: NaiveDate, now: NaiveDateTime) -> i64 {
    (now.date() - start).num_days() + 1
}

/// Calendar date of study day `day`.
pub fn day_date(start: NaiveDate, day: u8) -> NaiveDate {
    start + chrono::Duration::days(i64::from(day) - 1)
}
