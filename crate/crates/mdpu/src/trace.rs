//! Trace events: one flat JSON object per step or learner decision,
//! written as JSON Lines. The `event` field discriminates; all names are
//! the human-readable state/action names, not indices.

use crate::env::{EnvAction, Observation};
use crate::model::{MdpuSpec, EXPLORE_ACTION};
use serde::{Deserialize, Serialize};

/// Why a learner declared its current parameter guesses wrong.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InconsistencyKind {
    RewardExceedsRmax,
    TooManyActions,
    TooManyStates,
}

impl std::fmt::Display for InconsistencyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            InconsistencyKind::RewardExceedsRmax => "reward-exceeds-rmax",
            InconsistencyKind::TooManyActions => "too-many-actions",
            InconsistencyKind::TooManyStates => "too-many-states",
        };
        f.write_str(s)
    }
}

/// One outer-loop round's parameter guesses.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundParams {
    #[serde(rename = "N")]
    pub n: u64,
    pub k: u64,
    pub rmax: f64,
    #[serde(rename = "T")]
    pub horizon: u64,
}

/// Everything a run may log, environment steps and learner milestones
/// alike.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum TraceEvent {
    /// An ordinary action moved the trajectory.
    Move {
        step: u64,
        state: String,
        action: String,
        next: String,
        reward: f64,
    },
    /// An explore play revealed nothing.
    ExploreFail {
        step: u64,
        state: String,
        action: String,
        next: String,
        reward: f64,
    },
    /// An explore play revealed a hidden action.
    Discovery {
        step: u64,
        state: String,
        action: String,
        next: String,
        reward: f64,
        revealed: String,
    },
    /// A state-action pair reached its visit threshold and was frozen.
    KnownPair {
        step: u64,
        state: String,
        action: String,
    },
    /// The learner recomputed its plan.
    Replan { step: u64, state: String },
    /// The explore action at a state reached its play threshold and was
    /// retired from planning there.
    DiscoveryKnown { step: u64, state: String },
    /// An observation contradicted the current parameter guesses.
    Inconsistency {
        step: u64,
        kind: InconsistencyKind,
        detail: String,
    },
    /// An outer-loop round began with these guesses.
    RoundStart { round: u64, params: RoundParams },
}

impl TraceEvent {
    /// One JSON line, no trailing newline.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("trace events always serialize")
    }

    /// The step-indexed env events carry a step; round starts do not.
    pub fn step(&self) -> Option<u64> {
        match self {
            TraceEvent::Move { step, .. }
            | TraceEvent::ExploreFail { step, .. }
            | TraceEvent::Discovery { step, .. }
            | TraceEvent::KnownPair { step, .. }
            | TraceEvent::Replan { step, .. }
            | TraceEvent::DiscoveryKnown { step, .. }
            | TraceEvent::Inconsistency { step, .. } => Some(*step),
            TraceEvent::RoundStart { .. } => None,
        }
    }
}

/// Translate an environment observation into its trace event.
pub fn event_from_observation(
    spec: &MdpuSpec,
    step: u64,
    state: usize,
    action: EnvAction,
    obs: &Observation,
) -> TraceEvent {
    let state_name = spec.mdp.state_name(state).to_string();
    let next = spec.mdp.state_name(obs.next_state).to_string();
    match action {
        EnvAction::Act(a) => TraceEvent::Move {
            step,
            state: state_name,
            action: spec.mdp.action_name(state, a).to_string(),
            next,
            reward: obs.reward,
        },
        EnvAction::Explore => match obs.discovered {
            Some(revealed) => TraceEvent::Discovery {
                step,
                state: state_name,
                action: EXPLORE_ACTION.to_string(),
                next,
                reward: obs.reward,
                revealed: spec.mdp.action_name(state, revealed).to_string(),
            },
            None => TraceEvent::ExploreFail {
                step,
                state: state_name,
                action: EXPLORE_ACTION.to_string(),
                next,
                reward: obs.reward,
            },
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discovery::DiscoveryFamily;
    use crate::env::Env;
    use crate::model::fixtures::one_state_hidden;

    #[test]
    fn move_event_serializes_flat() {
        let e = TraceEvent::Move {
            step: 3,
            state: "s1".into(),
            action: "a".into(),
            next: "s2".into(),
            reward: 1.5,
        };
        assert_eq!(
            e.to_json(),
            r#"{"event":"move","step":3,"state":"s1","action":"a","next":"s2","reward":1.5}"#
        );
    }

    #[test]
    fn discovery_event_carries_revealed() {
        let e = TraceEvent::Discovery {
            step: 9,
            state: "s1".into(),
            action: EXPLORE_ACTION.into(),
            next: "s1".into(),
            reward: 0.5,
            revealed: "a2".into(),
        };
        let json = e.to_json();
        assert!(json.contains(r#""event":"discovery""#));
        assert!(json.contains(r#""revealed":"a2""#));
        let back: TraceEvent = serde_json::from_str(&json).unwrap();
        assert_eq!(back, e);
    }

    #[test]
    fn learner_events_serialize_with_expected_tags() {
        let e = TraceEvent::Inconsistency {
            step: 12,
            kind: InconsistencyKind::RewardExceedsRmax,
            detail: "reward 3 with rmax guess 1".into(),
        };
        assert!(e.to_json().contains(r#""kind":"reward-exceeds-rmax""#));
        let e = TraceEvent::RoundStart {
            round: 2,
            params: RoundParams {
                n: 3,
                k: 4,
                rmax: 3.0,
                horizon: 3,
            },
        };
        assert_eq!(
            e.to_json(),
            r#"{"event":"round_start","round":2,"params":{"N":3,"k":4,"rmax":3.0,"T":3}}"#
        );
        assert_eq!(e.step(), None);
        let e = TraceEvent::DiscoveryKnown {
            step: 40,
            state: "s2".into(),
        };
        assert!(e.to_json().contains(r#""event":"discovery_known""#));
        assert_eq!(e.step(), Some(40));
    }

    #[test]
    fn observation_translation_matches_step_kind() {
        let mut spec = one_state_hidden();
        spec.discovery = DiscoveryFamily::Constant { c: 1.0 };
        let mut env = Env::new(&spec, 0, 4).unwrap();
        let obs = env.step(EnvAction::Act(0));
        let e = event_from_observation(&spec, 1, 0, EnvAction::Act(0), &obs);
        assert!(matches!(e, TraceEvent::Move { .. }));
        let obs = env.step(EnvAction::Explore);
        let e = event_from_observation(&spec, 2, 0, EnvAction::Explore, &obs);
        match e {
            TraceEvent::Discovery {
                revealed, action, ..
            } => {
                assert_eq!(revealed, "a2");
                assert_eq!(action, EXPLORE_ACTION);
            }
            other => panic!("expected discovery, got {other:?}"),
        }
        let obs = env.step(EnvAction::Explore);
        let e = event_from_observation(&spec, 3, 0, EnvAction::Explore, &obs);
        assert!(matches!(e, TraceEvent::ExploreFail { .. }));
    }
}
