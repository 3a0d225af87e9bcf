//! One synthetic trainee.
//!
//! Each day the trainee may see a reminder, which strengthens the
//! association between the chosen context and the goal. The context then
//! retrieves the goal with probability `sigmoid(a0 + S − ρ·day)`; if it
//! does, the behavior succeeds with probability `sigmoid(e)` and the
//! outcome shifts the latent ease `e`. Judgments are noisy readouts of `e`.
//! The association decays by `λ` overnight and is never touched by
//! outcomes.

use coach_core::{Arm, DailyReport, JudgmentMeasurement, ReportStatus, StudyCondition, TargetBehavior, STUDY_DAYS};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::SimError;
use crate::params::TraineeParams;

/// Each day draws from its own region of the trainee's stream, so the
/// draws of day `t` do not depend on how many numbers earlier days used.
const WORDS_PER_DAY: u128 = 1 << 16;

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Probability that the context retrieves the goal on `day`.
pub fn retrieval_probability(params: &TraineeParams, association: f64, day: u8) -> f64 {
    sigmoid(params.a0 + association - params.rho * f64::from(day))
}

/// Probability that an attempted behavior succeeds.
pub fn success_probability(ease: f64) -> f64 {
    sigmoid(ease)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OutcomeCounts {
    pub success: u32,
    pub failure: u32,
    pub absent: u32,
}

impl OutcomeCounts {
    pub fn total(&self) -> u32 {
        self.success + self.failure + self.absent
    }
}

#[derive(Debug, Clone)]
pub struct TraineeState {
    pub trainee_id: String,
    /// Context-goal association strength, `S >= 0`.
    pub association: f64,
    /// Latent ease of the behavior, `e`.
    pub ease: f64,
    pub counts: OutcomeCounts,
    /// Next day to simulate.
    pub day: u8,
    pub condition: StudyCondition,
    /// Self-efficacy rated at behavior selection.
    pub initial_self_efficacy: u8,
    params: TraineeParams,
    rng: ChaCha8Rng,
}

/// What happened on one simulated day.
#[derive(Debug, Clone, PartialEq)]
pub struct DayRecord {
    pub report: DailyReport,
    pub reminder_scheduled: bool,
    /// Reminder acknowledged while active.
    pub reminder_acked: bool,
    pub retrieval_probability: f64,
}

/// Deterministic per-trainee generator: stream `index` of `seed`.
pub fn trainee_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn init_trainee(
    trainee_id: impl Into<String>,
    params: &TraineeParams,
    condition: StudyCondition,
    behavior: &TargetBehavior,
    rng: ChaCha8Rng,
) -> Result<TraineeState, SimError> {
    params.validate()?;
    if behavior.arm != condition.difficulty_arm || behavior.arm == Arm::Unassigned {
        return Err(SimError::ArmMismatch { behavior: behavior.arm, condition: condition.difficulty_arm });
    }
    let mut state = TraineeState {
        trainee_id: trainee_id.into(),
        association: 0.0,
        ease: -params.e0_scale * behavior.difficulty_score,
        counts: OutcomeCounts::default(),
        day: 1,
        condition,
        initial_self_efficacy: 3,
        params: *params,
        rng,
    };
    state.initial_self_efficacy = generate_judgments(state.ease, params, &mut state.rng).self_efficacy;
    Ok(state)
}

fn to_scale(x: f64) -> u8 {
    // f64::round rounds half away from zero
    x.round().clamp(1.0, 5.0) as u8
}

/// Draws the four 1..=5 judgments from latent ease `e`.
pub fn generate_judgments<R: Rng + ?Sized>(ease: f64, params: &TraineeParams, rng: &mut R) -> JudgmentMeasurement {
    let mut noisy = |sign: f64| {
        let z: f64 = rng.sample(StandardNormal);
        let ke = params.k * ease;
        // avoid inf - inf when e saturates and the noise is switched off
        let centre = if ke.is_finite() { 3.0 + sign * ke } else { sign * ke };
        to_scale(centre + params.sigma_j * z)
    };
    let difficulty = noisy(-1.0);
    let self_efficacy = noisy(1.0);
    let affective = noisy(1.0);
    let instrumental = noisy(1.0);
    JudgmentMeasurement::new(difficulty, self_efficacy, affective, instrumental).expect("values clamped to 1..=5")
}

impl TraineeState {
    pub fn params(&self) -> &TraineeParams {
        &self.params
    }

    /// Simulates the current day and advances to the next.
    pub fn step_day(&mut self, reminder_today: bool) -> Result<DayRecord, SimError> {
        let day = self.day;
        if day > STUDY_DAYS {
            return Err(SimError::StudyOver(day));
        }
        let p = self.params;
        self.rng.set_word_pos(u128::from(day) * WORDS_PER_DAY);
        // fixed draw order: acknowledgment, retrieval, success, judgments
        let u_ack: f64 = self.rng.random();
        let u_ret: f64 = self.rng.random();
        let u_succ: f64 = self.rng.random();

        let acked = reminder_today && u_ack < p.q;
        if acked {
            self.association += p.delta;
        }
        let p_r = retrieval_probability(&p, self.association, day);
        let status = if u_ret >= p_r {
            ReportStatus::Absent
        } else if u_succ < success_probability(self.ease) {
            ReportStatus::Success
        } else {
            ReportStatus::Failure
        };
        let judgments = match status {
            ReportStatus::Absent => {
                self.counts.absent += 1;
                None
            }
            ReportStatus::Success => {
                self.counts.success += 1;
                self.ease += p.eta_s;
                Some(generate_judgments(self.ease, &p, &mut self.rng))
            }
            ReportStatus::Failure => {
                self.counts.failure += 1;
                self.ease -= p.eta_f;
                Some(generate_judgments(self.ease, &p, &mut self.rng))
            }
        };
        self.association *= p.lambda;
        self.day += 1;

        let report = DailyReport::new(self.trainee_id.clone(), day, status, judgments)
            .expect("status and judgments generated consistently");
        Ok(DayRecord { report, reminder_scheduled: reminder_today, reminder_acked: acked, retrieval_probability: p_r })
    }
}
