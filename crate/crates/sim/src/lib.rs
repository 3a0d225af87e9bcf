//! Synthetic trainees driven by a small cognitive model of habit
//! formation, for simulating whole deployments of the coach.

pub mod assign;
pub mod cohort;
pub mod error;
pub mod params;
pub mod trainee;

pub use assign::{assign_conditions, proportional_counts, AssignMode};
pub use cohort::{run_cohort, run_conditions, run_trainee, trainee_id};
pub use error::SimError;
pub use params::TraineeParams;
pub use trainee::{
    generate_judgments, init_trainee, retrieval_probability, success_probability, trainee_rng, DayRecord,
    OutcomeCounts, TraineeState,
};
