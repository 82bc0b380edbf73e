//! Shot schedules: how many shots per Pauli each evaluation receives.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Stage {
    pub evaluations: u64,
    pub shots_per_pauli: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScheduleKind {
    OneStage,
    ThreeStage,
}

impl fmt::Display for ScheduleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScheduleKind::OneStage => "one_stage",
            ScheduleKind::ThreeStage => "three_stage",
        })
    }
}

/// Ordered stages of `(evaluations, shots per Pauli)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShotSchedule {
    kind: ScheduleKind,
    stages: Vec<Stage>,
    nominal_budget: u64,
}

impl ShotSchedule {
    /// `evaluations` calls at `budget / evaluations` shots each.
    ///
    /// Zero evaluations with zero budget gives an empty schedule.
    pub fn one_stage(budget: u64, evaluations: u64) -> Result<Self> {
        if evaluations == 0 {
            return Ok(Self { kind: ScheduleKind::OneStage, stages: Vec::new(), nominal_budget: budget });
        }
        if budget < evaluations {
            return Err(Error::ScheduleInfeasible(format!(
                "budget {budget} cannot fund {evaluations} evaluations at one shot each"
            )));
        }
        let shots = budget / evaluations;
        let remainder = budget - shots * evaluations;
        if remainder > 0 {
            log::info!("one-stage schedule leaves {remainder} shots per Pauli unspent");
        }
        Ok(Self {
            kind: ScheduleKind::OneStage,
            stages: vec![Stage { evaluations, shots_per_pauli: shots }],
            nominal_budget: budget,
        })
    }

    /// Three stages at `shots` with evaluation counts in ratio 10:3:1.
    ///
    /// The base count is `⌈budget / (10·s₁ + 3·s₂ + s₃)⌉`, so the schedule may
    /// exceed `budget` by less than one unit `10·s₁ + 3·s₂ + s₃`.
    pub fn three_stage(budget: u64, shots: (u64, u64, u64)) -> Result<Self> {
        let (s1, s2, s3) = shots;
        if !(0 < s1 && s1 < s2 && s2 < s3) {
            return Err(Error::ScheduleInfeasible(format!(
                "stage shots must be strictly increasing and positive, got {s1}, {s2}, {s3}"
            )));
        }
        let unit = 10 * s1 + 3 * s2 + s3;
        if budget < unit {
            return Err(Error::ScheduleInfeasible(format!(
                "budget {budget} is smaller than one 10:3:1 unit of {unit} shots"
            )));
        }
        let base = budget.div_ceil(unit);
        let schedule = Self {
            kind: ScheduleKind::ThreeStage,
            stages: vec![
                Stage { evaluations: 10 * base, shots_per_pauli: s1 },
                Stage { evaluations: 3 * base, shots_per_pauli: s2 },
                Stage { evaluations: base, shots_per_pauli: s3 },
            ],
            nominal_budget: budget,
        };
        if schedule.overshoot() > 0 {
            log::info!(
                "three-stage schedule overshoots the nominal budget by {} shots per Pauli",
                schedule.overshoot()
            );
        }
        Ok(schedule)
    }

    pub fn kind(&self) -> ScheduleKind {
        self.kind
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    pub fn nominal_budget(&self) -> u64 {
        self.nominal_budget
    }

    pub fn total_evaluations(&self) -> u64 {
        self.stages.iter().map(|s| s.evaluations).sum()
    }

    pub fn total_shots(&self) -> u64 {
        self.stages.iter().map(|s| s.evaluations * s.shots_per_pauli).sum()
    }

    /// Shots scheduled beyond the nominal budget.
    pub fn overshoot(&self) -> u64 {
        self.total_shots().saturating_sub(self.nominal_budget)
    }

    /// Budget a ledger must hold to fund the whole schedule.
    pub fn ledger_budget(&self) -> u64 {
        self.total_shots().max(self.nominal_budget)
    }

    /// `(stage index, shots)` for the zero-based evaluation index.
    pub fn shots_for(&self, evaluation: u64) -> Option<(usize, u64)> {
        let mut start = 0;
        for (i, s) in self.stages.iter().enumerate() {
            if evaluation < start + s.evaluations {
                return Some((i, s.shots_per_pauli));
            }
            start += s.evaluations;
        }
        None
    }

    /// Shots for every evaluation in order.
    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.stages
            .iter()
            .flat_map(|s| std::iter::repeat_n(s.shots_per_pauli, s.evaluations as usize))
    }
}

impl fmt::Display for ShotSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "schedule = {} budget = {}", self.kind, self.nominal_budget)?;
        for (i, s) in self.stages.iter().enumerate() {
            write!(f, " stage{} = {}x{}", i + 1, s.evaluations, s.shots_per_pauli)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn evals(s: &ShotSchedule) -> Vec<u64> {
        s.stages().iter().map(|s| s.evaluations).collect()
    }

    #[test]
    fn one_stage_examples() {
        let s = ShotSchedule::one_stage(10_000_000, 10_000).unwrap();
        assert_eq!(s.stages(), &[Stage { evaluations: 10_000, shots_per_pauli: 1000 }]);
        let s = ShotSchedule::one_stage(1_000_000_000, 10_000).unwrap();
        assert_eq!(s.stages()[0].shots_per_pauli, 100_000);
        assert!(matches!(ShotSchedule::one_stage(5, 10), Err(Error::ScheduleInfeasible(_))));
        let s = ShotSchedule::one_stage(1003, 10).unwrap();
        assert_eq!(s.total_shots(), 1000);
        assert_eq!(ShotSchedule::one_stage(0, 0).unwrap().total_evaluations(), 0);
    }

    #[test]
    fn three_stage_published_counts() {
        for (budget, shots) in [
            (10_000_000, (100, 1000, 10_000)),
            (100_000_000, (1000, 10_000, 100_000)),
            (1_000_000_000, (10_000, 100_000, 1_000_000)),
        ] {
            let s = ShotSchedule::three_stage(budget, shots).unwrap();
            assert_eq!(evals(&s), [7150, 2145, 715]);
            let unit = 10 * shots.0 + 3 * shots.1 + shots.2;
            assert!(s.total_shots() >= budget);
            assert!(s.total_shots() - budget < unit);
        }
    }

    #[test]
    fn three_stage_unit_and_errors() {
        let s = ShotSchedule::three_stage(14_000, (100, 1000, 10_000)).unwrap();
        assert_eq!(evals(&s), [10, 3, 1]);
        assert_eq!(s.overshoot(), 0);
        assert!(ShotSchedule::three_stage(13_999, (100, 1000, 10_000)).is_err());
        assert!(ShotSchedule::three_stage(10_000_000, (100, 100, 10_000)).is_err());
        assert!(ShotSchedule::three_stage(10_000_000, (0, 100, 10_000)).is_err());
    }

    #[test]
    fn iteration_is_monotone_and_complete() {
        let s = ShotSchedule::three_stage(30_000, (100, 1000, 10_000)).unwrap();
        let shots: Vec<u64> = s.iter().collect();
        assert_eq!(shots.len() as u64, s.total_evaluations());
        assert!(shots.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(shots.iter().sum::<u64>(), s.total_shots());
        for (i, &m) in shots.iter().enumerate() {
            assert_eq!(s.shots_for(i as u64).unwrap().1, m);
        }
        assert_eq!(s.shots_for(s.total_evaluations()), None);
        assert_eq!(s.shots_for(20), Some((0, 100)));
        assert_eq!(s.shots_for(30), Some((1, 1000)));
    }
}
