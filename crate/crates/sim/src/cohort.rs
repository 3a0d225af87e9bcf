use coach_core::{build_schedule, Catalog, Dataset, DatasetRow, StudyCondition, STUDY_DAYS};
use rand::seq::IndexedRandom;
use rayon::prelude::*;

use crate::assign::{assign_conditions, AssignMode};
use crate::error::SimError;
use crate::params::TraineeParams;
use crate::trainee::{init_trainee, trainee_rng};

/// Identifier of the trainee enrolled `index`-th (zero based).
pub fn trainee_id(index: usize) -> String {
    format!("t{:04}", index + 1)
}

/// Simulates one trainee for the whole study.
pub fn run_trainee(
    index: usize,
    condition: StudyCondition,
    params: &TraineeParams,
    seed: u64,
    catalog: &Catalog,
) -> Result<Vec<DatasetRow>, SimError> {
    let mut rng = trainee_rng(seed, index as u64);
    let goal = catalog.goals().choose(&mut rng).expect("catalog has goals");
    let candidates = catalog.candidate_behaviors(&goal.id, condition.difficulty_arm)?;
    let behavior = candidates.choose(&mut rng).expect("three candidates").clone();
    let schedule = if condition.reminders_on {
        Some(build_schedule(condition.reminder_count, condition.distribution)?)
    } else {
        None
    };

    let mut state = init_trainee(trainee_id(index), params, condition, &behavior, rng)?;
    let mut rows = Vec::with_capacity(usize::from(STUDY_DAYS));
    for day in 1..=STUDY_DAYS {
        let reminder = schedule.as_ref().is_some_and(|s| s.contains(day));
        let rec = state.step_day(reminder)?;
        rows.push(DatasetRow::from_report(
            &rec.report,
            condition,
            state.initial_self_efficacy,
            rec.reminder_scheduled,
            rec.reminder_acked,
        ));
    }
    Ok(rows)
}

/// Simulates the given trainees in parallel; rows are ordered by trainee
/// then day regardless of scheduling.
pub fn run_conditions(conditions: &[StudyCondition], params: &TraineeParams, seed: u64) -> Result<Dataset, SimError> {
    params.validate()?;
    let catalog = Catalog::bootstrap();
    let per_trainee: Vec<Vec<DatasetRow>> = conditions
        .par_iter()
        .enumerate()
        .map(|(i, &c)| run_trainee(i, c, params, seed, &catalog))
        .collect::<Result<_, _>>()?;
    Ok(Dataset::new(per_trainee.into_iter().flatten().collect()))
}

/// Simulated deployment with `n` trainees. Cohorts of ten or more use the
/// reference cell proportions; smaller ones draw cells at random.
pub fn run_cohort(n: usize, params: &TraineeParams, seed: u64) -> Result<Dataset, SimError> {
    let mode = if n >= 10 { AssignMode::Proportional } else { AssignMode::Random };
    let conditions = assign_conditions(n, mode, seed)?;
    run_conditions(&conditions, params, seed)
}
