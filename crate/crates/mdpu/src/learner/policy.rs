//! The artifact a learning run hands back: the final finite-horizon plan,
//! repeatable cyclically, expressed in env indices so it can be executed
//! directly.

use super::approx::{PlannedAction, PlanningModel};
use crate::env::EnvAction;
use crate::mdp::HorizonPlan;
use std::collections::BTreeMap;

/// A T-step plan executed cyclically: at absolute step `m` in state `s`,
/// play the plan's row `m mod T` entry for `s`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LearnedPolicy {
    horizon: usize,
    /// rows[m][plan_state] over the modeled (non-dummy) states.
    rows: Vec<Vec<PlannedAction>>,
    state_map: Vec<usize>,
    env_to_plan: BTreeMap<usize, usize>,
}

impl LearnedPolicy {
    pub fn from_plan(planning: &PlanningModel, plan: &HorizonPlan) -> Self {
        let n = planning.state_map.len();
        let rows = (0..plan.horizon())
            .map(|m| {
                (0..n)
                    .map(|s| planning.actions[s][plan.action(m, s)])
                    .collect()
            })
            .collect();
        LearnedPolicy {
            horizon: plan.horizon(),
            rows,
            state_map: planning.state_map.clone(),
            env_to_plan: planning.env_to_plan.clone(),
        }
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Env state indices this policy covers.
    pub fn covered_states(&self) -> &[usize] {
        &self.state_map
    }

    pub fn covers(&self, env_state: usize) -> bool {
        self.env_to_plan.contains_key(&env_state)
    }

    /// The planned action at absolute step `step` in `env_state`, or
    /// `None` when the state was never modeled.
    pub fn action_at(&self, step: u64, env_state: usize) -> Option<EnvAction> {
        let plan_s = *self.env_to_plan.get(&env_state)?;
        let row = (step % self.horizon as u64) as usize;
        Some(match self.rows[row][plan_s] {
            PlannedAction::Ordinary(a) => EnvAction::Act(a),
            PlannedAction::Explore => EnvAction::Explore,
        })
    }

    /// The first row as a stationary choice table, for horizon-1 policies
    /// and display.
    pub fn first_row(&self) -> Vec<(usize, PlannedAction)> {
        self.state_map
            .iter()
            .copied()
            .zip(self.rows[0].iter().copied())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learner::approx::ApproxModel;
    use crate::mdp::plan_finite_horizon;
    use crate::model::fixtures::aware_chain;

    fn known_chain_policy(horizon: usize) -> LearnedPolicy {
        let spec = aware_chain();
        let mut model = ApproxModel::new(2.0, 1, None);
        model.ensure_state(0, &[0, 1]);
        model.ensure_state(1, &[0]);
        model.record_transition(0, 0, 0, 1.0);
        model.record_transition(0, 1, 1, 0.0);
        model.record_transition(1, 0, 1, 2.0);
        let planning = model.build_planning_mdp(&spec);
        let plan = plan_finite_horizon(&planning.mdp, horizon).unwrap();
        LearnedPolicy::from_plan(&planning, &plan)
    }

    #[test]
    fn cyclic_lookup_wraps_rows() {
        let policy = known_chain_policy(3);
        // With T = 3 the learned optimum is to move to s2 and stay.
        assert_eq!(policy.action_at(0, 0), Some(EnvAction::Act(1)));
        assert_eq!(policy.action_at(1, 1), Some(EnvAction::Act(0)));
        assert_eq!(policy.action_at(3, 0), policy.action_at(0, 0), "wraps at T");
        assert_eq!(policy.horizon(), 3);
    }

    #[test]
    fn unmodeled_state_returns_none() {
        let policy = known_chain_policy(2);
        assert!(policy.covers(1));
        assert!(!policy.covers(9));
        assert_eq!(policy.action_at(0, 9), None);
    }

    #[test]
    fn covered_states_reports_env_indices() {
        let policy = known_chain_policy(2);
        assert_eq!(policy.covered_states(), &[0, 1]);
        assert_eq!(policy.first_row().len(), 2);
    }
}
