//! Reminder day vectors.
//!
//! The four vectors are stored literally. The massed 7-reminder vector ends
//! in a lone day 27, which no pairing rule reproduces.

use serde::{Deserialize, Serialize};

use crate::domain::{Distribution, STUDY_DAYS};
use crate::error::EngineError;

const UNIFORM_7: [u8; 7] = [4, 8, 12, 16, 20, 24, 28];
const MASSED_7: [u8; 7] = [3, 4, 11, 12, 19, 20, 27];
const UNIFORM_14: [u8; 14] = [2, 4, 6, 8, 10, 12, 14, 16, 18, 20, 22, 24, 26, 28];
const MASSED_14: [u8; 14] = [3, 4, 7, 8, 11, 12, 15, 16, 19, 20, 23, 24, 27, 28];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReminderSchedule {
    pub count: u8,
    pub distribution: Distribution,
    pub day_vector: Vec<u8>,
}

impl ReminderSchedule {
    pub fn contains(&self, day: u8) -> bool {
        self.day_vector.binary_search(&day).is_ok()
    }
}

pub fn build_schedule(count: u8, distribution: Distribution) -> Result<ReminderSchedule, EngineError> {
    let days: &[u8] = match (count, distribution) {
        (_, Distribution::None) => return Err(EngineError::BadDistribution),
        (7, Distribution::Uniform) => &UNIFORM_7,
        (7, Distribution::Massed) => &MASSED_7,
        (14, Distribution::Uniform) => &UNIFORM_14,
        (14, Distribution::Massed) => &MASSED_14,
        (other, _) => return Err(EngineError::BadCount(other)),
    };
    debug_assert!(days.windows(2).all(|w| w[0] < w[1]) && days[days.len() - 1] <= STUDY_DAYS);
    Ok(ReminderSchedule { count, distribution, day_vector: days.to_vec() })
}
