use coach_core::StudyCondition;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AssignMode {
    /// Cell sizes follow the reference deployment, scaled to `n`.
    Proportional,
    /// Each trainee drawn uniformly over the ten cells.
    Random,
}

/// Cell sizes of the reference deployment scaled to `n` by largest
/// remainder; ties go to the earlier cell.
pub fn proportional_counts(n: usize) -> Vec<usize> {
    let weights: Vec<usize> = StudyCondition::CELLS.iter().map(|&(_, w)| w as usize).collect();
    let total: usize = weights.iter().sum();
    let mut counts: Vec<usize> = weights.iter().map(|w| n * w / total).collect();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    // remainder numerators compared exactly in integers
    order.sort_by_key(|&i| std::cmp::Reverse(n * weights[i] % total));
    let missing = n - counts.iter().sum::<usize>();
    for &i in order.iter().take(missing) {
        counts[i] += 1;
    }
    counts
}

/// Conditions for `n` trainees in enrolment order.
pub fn assign_conditions(n: usize, mode: AssignMode, seed: u64) -> Result<Vec<StudyCondition>, SimError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX);
    match mode {
        AssignMode::Proportional => {
            if n < 10 {
                return Err(SimError::BadN(n));
            }
            let mut out: Vec<StudyCondition> = proportional_counts(n)
                .into_iter()
                .zip(StudyCondition::CELLS)
                .flat_map(|(k, (c, _))| std::iter::repeat_n(c, k))
                .collect();
            out.shuffle(&mut rng);
            Ok(out)
        }
        AssignMode::Random => {
            if n == 0 {
                return Err(SimError::BadN(n));
            }
            let cells: Vec<StudyCondition> = StudyCondition::CELLS.iter().map(|&(c, _)| c).collect();
            Ok((0..n).map(|_| *cells.choose(&mut rng).expect("ten cells")).collect())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sixty_reproduces_reference_cells() {
        assert_eq!(proportional_counts(60), [5, 7, 6, 5, 4, 7, 7, 6, 7, 6]);
        let conds = assign_conditions(60, AssignMode::Proportional, 1).unwrap();
        for (cell, k) in StudyCondition::CELLS {
            assert_eq!(conds.iter().filter(|&&c| c == cell).count(), k as usize);
        }
    }

    #[test]
    fn scaling_sums_to_n() {
        for n in 10..200 {
            assert_eq!(proportional_counts(n).iter().sum::<usize>(), n);
        }
        assert!(proportional_counts(10).iter().all(|&c| c == 1));
        assert_eq!(proportional_counts(120), [10, 14, 12, 10, 8, 14, 14, 12, 14, 12]);
    }

    #[test]
    fn deterministic_and_validated() {
        assert_eq!(
            assign_conditions(40, AssignMode::Random, 9).unwrap(),
            assign_conditions(40, AssignMode::Random, 9).unwrap()
        );
        assert_eq!(assign_conditions(9, AssignMode::Proportional, 1), Err(SimError::BadN(9)));
    }
}
