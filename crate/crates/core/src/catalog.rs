//! Goal and behavior catalog, and the easy/hard candidate sets drawn from it.
//!
//! Difficulty scores are synthetic. They preserve the orderings that are
//! known for certain (walking behaviors are ordered by walking time) and
//! are otherwise only used through their ranks within a goal.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::domain::{Arm, Goal, SlotFamily, TargetBehavior};
use crate::error::EngineError;

/// Number of behaviors offered per arm.
pub const ARM_SIZE: usize = 3;

pub const GOAL_EAT_MINDFULLY: &str = "eat-mindfully";
pub const GOAL_WALK: &str = "walk";
pub const GOAL_FRUITS_VEGETABLES: &str = "fruits-vegetables";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Catalog {
    goals: Vec<Goal>,
    behaviors: Vec<TargetBehavior>,
}

/// Catalog entry as written in a config file; the arm is derived.
#[derive(Debug, Clone, Deserialize)]
pub struct BehaviorSpec {
    pub id: String,
    pub goal_id: String,
    pub text: String,
    pub difficulty_score: f64,
}

#[derive(Debug, Clone, Deserialize)]
pub struct CatalogSpec {
    pub goals: Vec<Goal>,
    pub behaviors: Vec<BehaviorSpec>,
}

impl Catalog {
    /// Builds a catalog and tags, per goal, the three lowest-scoring
    /// behaviors easy and the three highest hard.
    pub fn new(goals: Vec<Goal>, behaviors: Vec<BehaviorSpec>) -> Result<Self, EngineError> {
        let mut goal_ids = HashSet::new();
        for g in &goals {
            if !goal_ids.insert(g.id.as_str()) {
                return Err(EngineError::BadCatalog(format!("duplicate goal id {:?}", g.id)));
            }
        }
        let mut behavior_ids = HashSet::new();
        for b in &behaviors {
            if !behavior_ids.insert(b.id.as_str()) {
                return Err(EngineError::BadCatalog(format!("duplicate behavior id {:?}", b.id)));
            }
            if !goal_ids.contains(b.goal_id.as_str()) {
                return Err(EngineError::BadCatalog(format!("behavior {:?} references unknown goal", b.id)));
            }
            if !b.difficulty_score.is_finite() {
                return Err(EngineError::BadCatalog(format!("behavior {:?} has non-finite difficulty", b.id)));
            }
        }

        let mut out: Vec<TargetBehavior> = behaviors
            .into_iter()
            .map(|b| TargetBehavior {
                id: b.id,
                goal_id: b.goal_id,
                text: b.text,
                difficulty_score: b.difficulty_score,
                arm: Arm::Unassigned,
            })
            .collect();

        for g in &goals {
            let mut idx: Vec<usize> = (0..out.len()).filter(|&i| out[i].goal_id == g.id).collect();
            if idx.len() < 2 * ARM_SIZE {
                continue;
            }
            idx.sort_by(|&a, &b| by_difficulty(&out[a], &out[b]));
            for &i in &idx[..ARM_SIZE] {
                out[i].arm = Arm::Easy;
            }
            for &i in &idx[idx.len() - ARM_SIZE..] {
                out[i].arm = Arm::Hard;
            }
        }

        Ok(Self { goals, behaviors: out })
    }

    pub fn from_spec(spec: CatalogSpec) -> Result<Self, EngineError> {
        Self::new(spec.goals, spec.behaviors)
    }

    /// The fixed three-goal catalog the coach ships with.
    pub fn bootstrap() -> Self {
        let goal = |id: &str, title: &str, description: &str, slot_family| Goal {
            id: id.into(),
            title: title.into(),
            description: description.into(),
            slot_family,
        };
        let goals = vec![
            goal(
                GOAL_EAT_MINDFULLY,
                "Eat slowly and mindfully",
                "Slow down and pay attention to one meal each day.",
                SlotFamily::Meal,
            ),
            goal(GOAL_WALK, "Walk everyday", "Fit a walk into one part of each day.", SlotFamily::Daypart),
            goal(
                GOAL_FRUITS_VEGETABLES,
                "Eat more fruits and vegetables",
                "Add produce to one meal each day.",
                SlotFamily::Meal,
            ),
        ];

        let table: [(&str, &str, &str, f64); 20] = [
            ("mindful-chew-10", GOAL_EAT_MINDFULLY, "Chew each bite 10 times", -0.9),
            ("mindful-fork-down", GOAL_EAT_MINDFULLY, "Put your fork down between bites", -0.6),
            ("mindful-20-min", GOAL_EAT_MINDFULLY, "Take 20 minutes to consume a meal", -0.4),
            ("mindful-no-screen", GOAL_EAT_MINDFULLY, "Eat without looking at a screen", 0.1),
            ("mindful-30-min", GOAL_EAT_MINDFULLY, "Take 30 minutes to consume a meal", 0.5),
            ("mindful-chew-liquified", GOAL_EAT_MINDFULLY, "Chew each bite until it is liquified", 0.9),
            ("mindful-silence", GOAL_EAT_MINDFULLY, "Eat the whole meal in silence", 1.1),
            ("walk-10", GOAL_WALK, "Walk for 10 minutes", -1.0),
            ("walk-stretch-5-15", GOAL_WALK, "Stretch for 5 minutes and walk for 15 minutes", -0.7),
            ("walk-20", GOAL_WALK, "Walk for 20 minutes", -0.4),
            ("walk-25", GOAL_WALK, "Walk for 25 minutes", 0.0),
            ("walk-stretch-10-30", GOAL_WALK, "Stretch for 10 minutes and walk for 30 minutes", 0.4),
            ("walk-40", GOAL_WALK, "Walk for 40 minutes", 0.7),
            ("walk-stretch-10-45", GOAL_WALK, "Stretch for 10 minutes and walk for 45 minutes", 1.0),
            ("produce-fruit", GOAL_FRUITS_VEGETABLES, "Have a piece of fruit", -0.8),
            ("produce-salad", GOAL_FRUITS_VEGETABLES, "Have a salad", -0.5),
            ("produce-double-favorite", GOAL_FRUITS_VEGETABLES, "Double the serving of your favorite vegetable", -0.2),
            ("produce-add-2", GOAL_FRUITS_VEGETABLES, "Add 2 servings of vegetables", 0.3),
            ("produce-new", GOAL_FRUITS_VEGETABLES, "Try a new vegetable", 0.6),
            ("produce-5-servings", GOAL_FRUITS_VEGETABLES, "Eat 5 servings of fruits and vegetables", 1.0),
        ];
        let behaviors = table
            .iter()
            .map(|&(id, goal_id, text, difficulty_score)| BehaviorSpec {
                id: id.into(),
                goal_id: goal_id.into(),
                text: text.into(),
                difficulty_score,
            })
            .collect();

        Self::new(goals, behaviors).expect("bootstrap catalog is valid")
    }

    pub fn goals(&self) -> &[Goal] {
        &self.goals
    }

    pub fn behaviors(&self) -> &[TargetBehavior] {
        &self.behaviors
    }

    pub fn goal(&self, id: &str) -> Option<&Goal> {
        self.goals.iter().find(|g| g.id == id)
    }

    pub fn behavior(&self, id: &str) -> Option<&TargetBehavior> {
        self.behaviors.iter().find(|b| b.id == id)
    }

    pub fn behaviors_for(&self, goal_id: &str) -> impl Iterator<Item = &TargetBehavior> + '_ {
        let goal_id = goal_id.to_string();
        self.behaviors.iter().filter(move |b| b.goal_id == goal_id)
    }

    /// The three behaviors offered to a trainee of `arm` who picked `goal_id`,
    /// ascending by difficulty.
    pub fn candidate_behaviors(&self, goal_id: &str, arm: Arm) -> Result<Vec<TargetBehavior>, EngineError> {
        if self.goal(goal_id).is_none() {
            return Err(EngineError::UnknownGoal(goal_id.to_string()));
        }
        let mut pool: Vec<&TargetBehavior> = self.behaviors_for(goal_id).collect();
        if pool.len() < 2 * ARM_SIZE {
            return Err(EngineError::InsufficientCatalog { goal: goal_id.to_string(), found: pool.len() });
        }
        pool.sort_by(|a, b| by_difficulty(a, b));
        let picked = match arm {
            Arm::Easy => &pool[..ARM_SIZE],
            Arm::Hard => &pool[pool.len() - ARM_SIZE..],
            Arm::Unassigned => return Err(EngineError::BadCatalog("no candidate set for unassigned arm".into())),
        };
        Ok(picked.iter().map(|b| (*b).clone()).collect())
    }
}

fn by_difficulty(a: &TargetBehavior, b: &TargetBehavior) -> std::cmp::Ordering {
    a.difficulty_score.total_cmp(&b.difficulty_score).then_with(|| a.id.cmp(&b.id))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(v: &[TargetBehavior]) -> Vec<&str> {
        v.iter().map(|b| b.id.as_str()).collect()
    }

    #[test]
    fn bootstrap_shape() {
        let c = Catalog::bootstrap();
        assert_eq!(c.goals().len(), 3);
        for g in c.goals() {
            assert!(c.behaviors_for(&g.id).count() >= 6, "{}", g.id);
            assert_eq!(c.behaviors_for(&g.id).filter(|b| b.arm == Arm::Easy).count(), 3);
            assert_eq!(c.behaviors_for(&g.id).filter(|b| b.arm == Arm::Hard).count(), 3);
        }
        let titles: Vec<_> = c.goals().iter().map(|g| g.title.as_str()).collect();
        assert!(titles.contains(&"Eat slowly and mindfully"));
        assert!(titles.contains(&"Walk everyday"));
        assert!(titles.contains(&"Eat more fruits and vegetables"));
    }

    #[test]
    fn arm_tags_match_extremes() {
        let c = Catalog::bootstrap();
        for g in c.goals() {
            let easy_max = c
                .behaviors_for(&g.id)
                .filter(|b| b.arm == Arm::Easy)
                .map(|b| b.difficulty_score)
                .fold(f64::MIN, f64::max);
            let others_min = c
                .behaviors_for(&g.id)
                .filter(|b| b.arm != Arm::Easy)
                .map(|b| b.difficulty_score)
                .fold(f64::MAX, f64::min);
            assert!(easy_max < others_min);
            let hard_min = c
                .behaviors_for(&g.id)
                .filter(|b| b.arm == Arm::Hard)
                .map(|b| b.difficulty_score)
                .fold(f64::MAX, f64::min);
            let rest_max = c
                .behaviors_for(&g.id)
                .filter(|b| b.arm != Arm::Hard)
                .map(|b| b.difficulty_score)
                .fold(f64::MIN, f64::max);
            assert!(rest_max < hard_min);
        }
    }

    #[test]
    fn walk_easy_is_three_shortest() {
        let c = Catalog::bootstrap();
        let easy = c.candidate_behaviors(GOAL_WALK, Arm::Easy).unwrap();
        assert_eq!(ids(&easy), ["walk-10", "walk-stretch-5-15", "walk-20"]);
        let hard = c.candidate_behaviors(GOAL_WALK, Arm::Hard).unwrap();
        assert_eq!(ids(&hard), ["walk-stretch-10-30", "walk-40", "walk-stretch-10-45"]);
        assert!(easy.iter().all(|e| !hard.contains(e)));
    }

    #[test]
    fn walking_scores_follow_duration() {
        let c = Catalog::bootstrap();
        // walking minutes are the last number in the instruction
        let minutes = |text: &str| -> u32 {
            text.split(|ch: char| !ch.is_ascii_digit()).filter_map(|t| t.parse::<u32>().ok()).last().unwrap()
        };
        let mut walks: Vec<_> = c.behaviors_for(GOAL_WALK).collect();
        walks.sort_by(|a, b| a.difficulty_score.total_cmp(&b.difficulty_score));
        let durations: Vec<u32> = walks.iter().map(|b| minutes(&b.text)).collect();
        assert!(durations.windows(2).all(|w| w[0] < w[1]), "{durations:?}");
    }

    #[test]
    fn six_behaviors_partition() {
        let c = Catalog::bootstrap();
        let mut both = c.candidate_behaviors(GOAL_FRUITS_VEGETABLES, Arm::Easy).unwrap();
        both.extend(c.candidate_behaviors(GOAL_FRUITS_VEGETABLES, Arm::Hard).unwrap());
        let mut got = ids(&both);
        got.sort();
        let mut all: Vec<_> = c.behaviors_for(GOAL_FRUITS_VEGETABLES).map(|b| b.id.as_str()).collect();
        all.sort();
        assert_eq!(got, all);
    }

    #[test]
    fn candidates_sorted_ascending() {
        let c = Catalog::bootstrap();
        for g in c.goals() {
            for arm in [Arm::Easy, Arm::Hard] {
                let v = c.candidate_behaviors(&g.id, arm).unwrap();
                assert_eq!(v.len(), 3);
                assert!(v.windows(2).all(|w| w[0].difficulty_score <= w[1].difficulty_score));
            }
        }
    }

    #[test]
    fn candidate_errors() {
        let c = Catalog::bootstrap();
        assert_eq!(c.candidate_behaviors("swim", Arm::Easy), Err(EngineError::UnknownGoal("swim".into())));

        let goals = vec![Goal { id: "g".into(), title: "G".into(), description: String::new(), slot_family: SlotFamily::Meal }];
        let behaviors = (0..5)
            .map(|i| BehaviorSpec { id: format!("b{i}"), goal_id: "g".into(), text: "t".into(), difficulty_score: i as f64 })
            .collect();
        let small = Catalog::new(goals, behaviors).unwrap();
        assert_eq!(
            small.candidate_behaviors("g", Arm::Hard),
            Err(EngineError::InsufficientCatalog { goal: "g".into(), found: 5 })
        );
    }

    #[test]
    fn catalog_rejects_bad_entries() {
        let goals = vec![Goal { id: "g".into(), title: "G".into(), description: String::new(), slot_family: SlotFamily::Meal }];
        let nan = vec![BehaviorSpec { id: "b".into(), goal_id: "g".into(), text: "t".into(), difficulty_score: f64::NAN }];
        assert!(Catalog::new(goals.clone(), nan).is_err());
        let orphan = vec![BehaviorSpec { id: "b".into(), goal_id: "h".into(), text: "t".into(), difficulty_score: 0.0 }];
        assert!(Catalog::new(goals, orphan).is_err());
    }
}
