//! Learning algorithms: the fully-aware baseline and the
//! unawareness-tolerant learner built on top of it, plus the shared
//! report/replay machinery.

pub mod approx;
pub mod policy;
pub mod rmax;
pub mod urmax;

pub use approx::{ApproxModel, ExploreRecord, PlannedAction, PlanningModel, DUMMY_STATE};
pub use policy::LearnedPolicy;
pub use rmax::{rmax_run, RmaxParams};
pub use urmax::{
    urmax_inner, urmax_outer, OuterConfig, OuterReport, RoundRecord, UrmaxConfig, UrmaxOutcome,
    UrmaxStatus,
};

use crate::bounds::TheoryError;
use crate::env::{Env, EnvAction};
use crate::trace::{event_from_observation, TraceEvent};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LearnerError {
    #[error("the baseline learner requires a fully-aware specification (no hidden actions)")]
    NeedsFullAwareness,
    #[error(transparent)]
    Theory(#[from] TheoryError),
}

/// What one learning run produced.
#[derive(Clone, Debug)]
pub struct RunReport {
    /// Environment steps this run consumed.
    pub steps: u64,
    /// True when every pair reached its threshold within budget.
    pub converged: bool,
    pub events: Vec<TraceEvent>,
    pub policy: LearnedPolicy,
    pub model: ApproxModel,
}

/// Tallies from executing a fixed policy.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ReplayStats {
    pub steps: u64,
    /// Reward collected by ordinary actions.
    pub underlying_reward_sum: f64,
    /// Reward collected by explore plays.
    pub explore_reward_sum: f64,
    pub discoveries: u64,
    /// Steps where the policy did not cover the current state and the
    /// lowest-index playable action was substituted.
    pub fallback_steps: u64,
}

impl ReplayStats {
    /// Mean reward per step; explore rewards are excluded unless asked
    /// for.
    pub fn average_reward(&self, include_explore: bool) -> f64 {
        if self.steps == 0 {
            return 0.0;
        }
        let total = if include_explore {
            self.underlying_reward_sum + self.explore_reward_sum
        } else {
            self.underlying_reward_sum
        };
        total / self.steps as f64
    }
}

/// Run `policy` for `max_steps` env steps, restarting its cycle at local
/// step zero. Observations are appended to `events` and recorded into
/// `model` when those sinks are provided; at states the policy never
/// modeled, the lowest-index playable action (or explore, when nothing
/// else is playable) is substituted.
pub fn execute_policy(
    env: &mut Env,
    policy: &LearnedPolicy,
    max_steps: u64,
    mut model: Option<&mut ApproxModel>,
    mut events: Option<&mut Vec<TraceEvent>>,
) -> ReplayStats {
    let spec = env.spec();
    let mut stats = ReplayStats::default();
    for m in 0..max_steps {
        let s = env.current_state();
        let act = match policy.action_at(m, s) {
            Some(act) => act,
            None => {
                stats.fallback_steps += 1;
                match env.revealed_actions(s).first() {
                    Some(&a) => EnvAction::Act(a),
                    None => EnvAction::Explore,
                }
            }
        };
        let obs = env.step(act);
        stats.steps += 1;
        if obs.was_explore {
            stats.explore_reward_sum += obs.reward;
        } else {
            stats.underlying_reward_sum += obs.reward;
        }
        if obs.discovered.is_some() {
            stats.discoveries += 1;
        }
        if let Some(events) = events.as_deref_mut() {
            events.push(event_from_observation(spec, env.steps(), s, act, &obs));
        }
        if let Some(model) = model.as_deref_mut() {
            match act {
                EnvAction::Act(a) => {
                    model.record_transition(s, a, obs.next_state, obs.reward);
                    if !model.has_state(obs.next_state) {
                        model.ensure_state(obs.next_state, &env.revealed_actions(obs.next_state));
                    }
                }
                EnvAction::Explore => {
                    model.record_explore(s, obs.discovered, obs.reward);
                }
            }
        }
    }
    stats
}
