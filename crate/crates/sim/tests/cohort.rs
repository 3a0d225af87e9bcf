use coach_core::{Arm, Catalog, ReportStatus, StudyCondition, STUDY_DAYS};
use coach_sim::{init_trainee, run_cohort, run_conditions, trainee_rng, SimError, TraineeParams};
use coach_stats::{fit_models, ModelId, Response};
use proptest::prelude::*;

#[test]
fn same_seed_same_dataset() {
    let p = TraineeParams::default();
    let a = run_cohort(60, &p, 11).unwrap();
    let b = run_cohort(60, &p, 11).unwrap();
    assert_eq!(a.to_csv_string(), b.to_csv_string());
    assert_ne!(a.to_csv_string(), run_cohort(60, &p, 12).unwrap().to_csv_string());
}

#[test]
fn sixty_trainees_give_full_panel() {
    let ds = run_cohort(60, &TraineeParams::default(), 1).unwrap();
    assert_eq!(ds.len(), 60 * usize::from(STUDY_DAYS));
    for r in &ds.rows {
        assert_eq!(r.status == ReportStatus::Absent, r.difficulty.is_none());
        assert!(!r.reminder_acked || r.reminder_scheduled);
    }
}

#[test]
fn no_acks_without_reminders() {
    let controls = vec![StudyCondition::control(Arm::Hard), StudyCondition::control(Arm::Easy)].repeat(10);
    let ds = run_conditions(&controls, &TraineeParams::default(), 3).unwrap();
    assert!(ds.rows.iter().all(|r| !r.reminder_scheduled && !r.reminder_acked));
}

#[test]
fn never_acknowledging_makes_reminders_inert() {
    let p = TraineeParams { q: 0.0, ..TraineeParams::default() };
    let reminded: Vec<StudyCondition> = StudyCondition::CELLS.iter().map(|(c, _)| *c).filter(|c| c.reminders_on).collect();
    let silenced: Vec<StudyCondition> = reminded.iter().map(|c| StudyCondition::control(c.difficulty_arm)).collect();
    let a = run_conditions(&reminded, &p, 5).unwrap();
    let b = run_conditions(&silenced, &p, 5).unwrap();
    for (x, y) in a.rows.iter().zip(&b.rows) {
        assert!(!x.reminder_acked);
        assert_eq!((x.status, x.difficulty, x.self_efficacy), (y.status, y.difficulty, y.self_efficacy));
    }
}

#[test]
fn arm_mismatch_rejected() {
    let catalog = Catalog::bootstrap();
    let goal = &catalog.goals()[0];
    let easy = catalog.candidate_behaviors(&goal.id, Arm::Easy).unwrap();
    let err = init_trainee("t0001", &TraineeParams::default(), StudyCondition::control(Arm::Hard), &easy[0], trainee_rng(0, 0));
    assert!(matches!(err, Err(SimError::ArmMismatch { .. })));
}

#[test]
fn reminders_raise_mean_completion() {
    let p = TraineeParams::default();
    let (mut reminded, mut control) = (Vec::new(), Vec::new());
    for seed in 0..20 {
        let ds = run_cohort(60, &p, seed).unwrap();
        let rate = |on: bool| {
            let rows: Vec<_> = ds.rows.iter().filter(|r| r.condition.reminders_on == on).collect();
            rows.iter().filter(|r| r.completed()).count() as f64 / rows.len() as f64
        };
        reminded.push(rate(true));
        control.push(rate(false));
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    assert!(mean(&reminded) > mean(&control), "{} vs {}", mean(&reminded), mean(&control));
}

#[test]
fn judgments_track_experience() {
    let ds = run_cohort(60, &TraineeParams::default(), 2).unwrap();
    let res = fit_models(&ds, &[ModelId::VII]).unwrap();
    let m = res.iter().find(|m| m.spec.key == "VII-judgments").unwrap();
    let coef = |r: Response, name: &str| m.fit(r).unwrap().coefficient(name).unwrap().estimate;
    assert!(coef(Response::SelfEfficacy, "n_successes") > 0.0);
    assert!(coef(Response::SelfEfficacy, "n_failures") < 0.0);
    assert!(coef(Response::Difficulty, "n_successes") < 0.0);
    assert!(coef(Response::Difficulty, "n_failures") > 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn counts_sum_to_elapsed_days(seed in any::<u64>(), cell in 0usize..10, reminder_mask in any::<u32>()) {
        let catalog = Catalog::bootstrap();
        let condition = StudyCondition::CELLS[cell].0;
        let behavior = catalog.candidate_behaviors(&catalog.goals()[0].id, condition.difficulty_arm).unwrap()[0].clone();
        let mut st = init_trainee("t0001", &TraineeParams::default(), condition, &behavior, trainee_rng(seed, 0)).unwrap();
        for day in 1..=STUDY_DAYS {
            prop_assert_eq!(st.counts.total(), u32::from(day) - 1);
            let ease = st.ease;
            let rec = st.step_day(reminder_mask & (1 << day) != 0).unwrap();
            prop_assert!(st.association >= 0.0);
            if rec.report.status == ReportStatus::Absent {
                prop_assert_eq!(st.ease, ease);
            }
        }
        prop_assert!(matches!(st.step_day(false), Err(SimError::StudyOver(_))));
    }

    #[test]
    fn stronger_reminders_never_lose_retrievals(seed in any::<u64>(), d1 in 0.0f64..2.0, extra in 0.0f64..2.0) {
        let lo = TraineeParams { delta: d1, ..TraineeParams::default() };
        let hi = TraineeParams { delta: d1 + extra, ..lo };
        let a = run_cohort(20, &lo, seed).unwrap();
        let b = run_cohort(20, &hi, seed).unwrap();
        for (x, y) in a.rows.iter().zip(&b.rows) {
            prop_assert!(!x.reported() || y.reported(), "{} day {}", x.trainee_id, x.day);
        }
    }
}
