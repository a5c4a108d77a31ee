//! The fully-aware baseline learner: plan optimistically, act, freeze
//! pairs as they reach the visit threshold, replan on every model change,
//! stop when everything is known.

use super::approx::{ApproxModel, PlannedAction};
use super::policy::LearnedPolicy;
use super::{LearnerError, RunReport};
use crate::bounds::{k1_rmax, TheoryError};
use crate::env::{Env, EnvAction};
use crate::mdp::plan_finite_horizon;
use crate::trace::{event_from_observation, TraceEvent};

#[derive(Clone, Debug)]
pub struct RmaxParams {
    /// Reward ceiling used for optimistic entries and the threshold
    /// formula.
    pub rmax: f64,
    /// Planning horizon T.
    pub horizon: u64,
    pub eps: f64,
    pub delta: f64,
    /// Visit threshold to use instead of the formula value. The formula
    /// value targets the proofs and is far beyond desk scale.
    pub k1_override: Option<u64>,
    pub step_budget: u64,
}

impl RmaxParams {
    /// The visit threshold this run will actually use.
    pub fn resolve_k1(&self, n_states: u64, n_actions: u64) -> Result<u64, TheoryError> {
        match self.k1_override {
            Some(v) => Ok(v),
            None => Ok(k1_rmax(
                n_states,
                n_actions,
                self.horizon,
                self.rmax,
                self.eps,
                self.delta,
            )?
            .as_finite()
            .unwrap_or(u64::MAX)),
        }
    }
}

/// Learn a fully-aware MDP (no hidden actions anywhere) to convergence or
/// budget exhaustion. The learner knows the full state and action space up
/// front; only transition probabilities and rewards are learned.
pub fn rmax_run(env: &mut Env, params: &RmaxParams) -> Result<RunReport, LearnerError> {
    let spec = env.spec();
    if !spec.fully_aware() {
        return Err(LearnerError::NeedsFullAwareness);
    }
    if params.horizon == 0 {
        return Err(TheoryError::BadInput("T must be at least 1".into()).into());
    }
    let n_states = spec.n_states() as u64;
    let n_actions = spec.mdp.distinct_action_count() as u64;
    let k1 = params.resolve_k1(n_states, n_actions)?;
    if params.k1_override.is_some() {
        let formula = k1_rmax(
            n_states,
            n_actions,
            params.horizon,
            params.rmax,
            params.eps,
            params.delta,
        )?;
        log::info!("formula K1 = {formula}; running with K1 = {k1}");
    }

    let mut model = ApproxModel::new(params.rmax, k1, None);
    for s in 0..spec.n_states() {
        let all: Vec<usize> = (0..spec.mdp.n_actions(s)).collect();
        model.ensure_state(s, &all);
    }

    let mut events: Vec<TraceEvent> = Vec::new();
    let mut steps = 0u64;
    let converged = 'learn: loop {
        if model.all_known() {
            break true;
        }
        if steps >= params.step_budget {
            break false;
        }
        let planning = model.build_planning_mdp(spec);
        let plan = plan_finite_horizon(&planning.mdp, params.horizon as usize)
            .expect("planning model is well-formed by construction");
        events.push(TraceEvent::Replan {
            step: env.steps(),
            state: spec.mdp.state_name(env.current_state()).to_string(),
        });
        for m in 0..params.horizon {
            if steps >= params.step_budget {
                continue 'learn;
            }
            let s = env.current_state();
            let plan_s = planning.env_to_plan[&s];
            let PlannedAction::Ordinary(a) =
                planning.actions[plan_s][plan.action(m as usize, plan_s)]
            else {
                unreachable!("explore is never modeled for the fully-aware learner")
            };
            let obs = env.step(EnvAction::Act(a));
            steps += 1;
            events.push(event_from_observation(
                spec,
                env.steps(),
                s,
                EnvAction::Act(a),
                &obs,
            ));
            if model.record_transition(s, a, obs.next_state, obs.reward) {
                events.push(TraceEvent::KnownPair {
                    step: env.steps(),
                    state: spec.mdp.state_name(s).to_string(),
                    action: spec.mdp.action_name(s, a).to_string(),
                });
                continue 'learn;
            }
        }
    };

    let planning = model.build_planning_mdp(spec);
    let plan = plan_finite_horizon(&planning.mdp, params.horizon as usize)
        .expect("planning model is well-formed by construction");
    let policy = LearnedPolicy::from_plan(&planning, &plan);
    Ok(RunReport {
        steps,
        converged,
        events,
        policy,
        model,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learner::execute_policy;
    use crate::mdp::opt_oracle;
    use crate::model::fixtures::{aware_chain, one_state_hidden};

    fn params(k1: u64, budget: u64, horizon: u64) -> RmaxParams {
        RmaxParams {
            rmax: 2.0,
            horizon,
            eps: 1.0,
            delta: 0.25,
            k1_override: Some(k1),
            step_budget: budget,
        }
    }

    #[test]
    fn two_action_bandit_learns_the_better_arm() {
        let mut spec = one_state_hidden();
        spec.aware_actions = vec![vec![0, 1]];
        let mut env = Env::new(&spec, 0, 1).unwrap();
        let report = rmax_run(&mut env, &params(5, 100, 1)).unwrap();
        assert!(report.converged);
        assert_eq!(report.policy.action_at(0, 0), Some(EnvAction::Act(1)));
        assert_eq!(report.steps, 10, "five visits for each of two arms");
        assert!(matches!(report.events[0], TraceEvent::Replan { .. }));
        let known: Vec<_> = report
            .events
            .iter()
            .filter(|e| matches!(e, TraceEvent::KnownPair { .. }))
            .collect();
        assert_eq!(known.len(), 2);
    }

    #[test]
    fn zero_threshold_returns_immediately() {
        let spec = aware_chain();
        let mut env = Env::new(&spec, 0, 1).unwrap();
        let report = rmax_run(&mut env, &params(0, 100, 3)).unwrap();
        assert!(report.converged);
        assert_eq!(report.steps, 0);
        assert!(report.events.is_empty());
    }

    #[test]
    fn unawareness_is_rejected() {
        let spec = one_state_hidden();
        let mut env = Env::new(&spec, 0, 1).unwrap();
        assert!(matches!(
            rmax_run(&mut env, &params(5, 100, 1)),
            Err(LearnerError::NeedsFullAwareness)
        ));
    }

    #[test]
    fn budget_exhaustion_is_reported_not_fatal() {
        let spec = aware_chain();
        let mut env = Env::new(&spec, 0, 1).unwrap();
        let report = rmax_run(&mut env, &params(200, 10, 3)).unwrap();
        assert!(!report.converged);
        assert_eq!(report.steps, 10);
    }

    /// Two states with a noisy hop forward and a sure way back, so every
    /// pair stays reachable and full convergence is attainable.
    fn noisy_cycle() -> crate::model::MdpuSpec {
        use crate::mdp::{Edge, MdpSpec};
        let mut mdp = MdpSpec::new();
        let s1 = mdp.add_state("s1");
        let s2 = mdp.add_state("s2");
        mdp.add_action(s1, "stay", vec![Edge::new(s1, 1.0, 1.0)]);
        mdp.add_action(
            s1,
            "hop",
            vec![Edge::new(s2, 0.9, 0.0), Edge::new(s1, 0.1, 0.0)],
        );
        mdp.add_action(s2, "stay", vec![Edge::new(s2, 1.0, 2.0)]);
        mdp.add_action(s2, "back", vec![Edge::new(s1, 1.0, 0.0)]);
        crate::model::MdpuSpec {
            mdp,
            aware_states: vec![0, 1],
            aware_actions: vec![vec![0, 1], vec![0, 1]],
            discovery: crate::discovery::DiscoveryFamily::Constant { c: 0.5 },
            explore_found: vec![0.5, 0.5],
            explore_not_found: vec![0.0, 0.0],
        }
    }

    #[test]
    fn cycle_reaches_oracle_value_across_seeds() {
        let spec = noisy_cycle();
        let (oracle_value, _) = opt_oracle(&spec.mdp, 1000).unwrap();
        let mut p = params(200, 5000, 3);
        p.rmax = 3.0;
        let mut good = 0;
        for seed in 0..100 {
            let mut env = Env::new(&spec, 0, seed).unwrap();
            let report = rmax_run(&mut env, &p).unwrap();
            assert!(report.converged);
            let mut fresh = Env::new(&spec, 0, seed + 1000).unwrap();
            let stats = execute_policy(&mut fresh, &report.policy, 1000, None, None);
            if (stats.average_reward(false) - oracle_value).abs() <= 0.1 {
                good += 1;
            }
        }
        assert!(
            good >= 95,
            "only {good} of 100 seeds reached the oracle value"
        );
    }

    #[test]
    fn absorbing_state_blocks_convergence_but_not_optimality() {
        // Once the learner hops to s2 it can never return, so the hop
        // pair at s1 is stuck below threshold forever. The run exhausts
        // its budget, yet the final optimistic plan is already optimal.
        let spec = aware_chain();
        let mut env = Env::new(&spec, 0, 9).unwrap();
        let mut p = params(200, 1000, 3);
        p.rmax = 3.0;
        let report = rmax_run(&mut env, &p).unwrap();
        assert!(!report.converged);
        assert_eq!(report.steps, 1000);
        let (oracle_value, _) = opt_oracle(&spec.mdp, 1000).unwrap();
        let mut fresh = Env::new(&spec, 0, 10).unwrap();
        let stats = execute_policy(&mut fresh, &report.policy, 1000, None, None);
        assert!((stats.average_reward(false) - oracle_value).abs() < 1e-9);
    }

    #[test]
    fn formula_threshold_is_used_when_no_override() {
        let p = RmaxParams {
            rmax: 1.0,
            horizon: 1,
            eps: 1.0,
            delta: 0.25,
            k1_override: None,
            step_budget: 10,
        };
        assert_eq!(p.resolve_k1(2, 2).unwrap(), 873);
    }
}
