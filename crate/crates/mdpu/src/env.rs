//! Seeded simulation of an MDPU: ordinary actions follow the transition
//! law, the explore action runs the discovery mechanism. One environment
//! is one trajectory; everything downstream of the seed is deterministic.

use crate::model::MdpuSpec;
use crate::rng::{CounterRng, Stream};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// What a learner may submit to [`Env::step`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnvAction {
    /// The reserved explore action.
    Explore,
    /// An ordinary action, by index at the current state.
    Act(usize),
}

/// The result of one step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub next_state: usize,
    pub reward: f64,
    /// Action index revealed by a successful explore play, if any.
    pub discovered: Option<usize>,
    pub was_explore: bool,
}

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("start state {0} is not initially known to the decision maker")]
    StartNotAware(String),
}

/// Everything that changes as an environment runs, in serializable form.
/// Restoring a snapshot reproduces the future exactly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvSnapshot {
    state: usize,
    steps: u64,
    failures: Vec<u64>,
    undiscovered: Vec<Vec<usize>>,
    rng: CounterRng,
}

/// A running MDPU simulation. Borrows the immutable spec; owns the mutable
/// trajectory state.
#[derive(Debug)]
pub struct Env<'a> {
    spec: &'a MdpuSpec,
    state: usize,
    steps: u64,
    /// Consecutive failed explore plays per state since the last discovery
    /// there.
    failures: Vec<u64>,
    /// Sorted not-yet-revealed action indices per state. Only ever shrinks.
    undiscovered: Vec<Vec<usize>>,
    rng: CounterRng,
}

impl<'a> Env<'a> {
    pub fn new(spec: &'a MdpuSpec, start: usize, seed: u64) -> Result<Self, EnvError> {
        if !spec.is_aware_state(start) {
            return Err(EnvError::StartNotAware(
                spec.mdp.state_name(start).to_string(),
            ));
        }
        let n = spec.n_states();
        Ok(Env {
            spec,
            state: start,
            steps: 0,
            failures: vec![0; n],
            undiscovered: (0..n).map(|s| spec.hidden_at(s)).collect(),
            rng: CounterRng::new(seed),
        })
    }

    pub fn spec(&self) -> &'a MdpuSpec {
        self.spec
    }

    pub fn current_state(&self) -> usize {
        self.state
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Consecutive failed explore plays at `s` since the last discovery.
    pub fn failures_at(&self, s: usize) -> u64 {
        self.failures[s]
    }

    pub fn undiscovered_count(&self, s: usize) -> usize {
        self.undiscovered[s].len()
    }

    /// Sorted indices of actions the decision maker may currently play at
    /// `s`: the initially-known ones plus everything revealed since.
    pub fn revealed_actions(&self, s: usize) -> Vec<usize> {
        let hidden = &self.undiscovered[s];
        (0..self.spec.mdp.n_actions(s))
            .filter(|a| !hidden.contains(a))
            .collect()
    }

    pub fn is_playable(&self, s: usize, a: usize) -> bool {
        a < self.spec.mdp.n_actions(s) && !self.undiscovered[s].contains(&a)
    }

    /// True once every action everywhere has been revealed.
    pub fn fully_discovered(&self) -> bool {
        self.undiscovered.iter().all(|u| u.is_empty())
    }

    /// Execute one action. Ordinary actions sample a transition edge;
    /// explore leaves the state unchanged and may reveal a hidden action.
    ///
    /// # Panics
    ///
    /// Submitting an ordinary action the decision maker has not been made
    /// aware of is a learner contract violation and panics.
    pub fn step(&mut self, action: EnvAction) -> Observation {
        self.steps += 1;
        match action {
            EnvAction::Act(a) => {
                assert!(
                    self.is_playable(self.state, a),
                    "contract fault: action {a} is not revealed at state {}",
                    self.spec.mdp.state_name(self.state)
                );
                let edges = self.spec.mdp.edges(self.state, a);
                let draw = self.rng.next_f64(Stream::Transition);
                let mut acc = 0.0;
                let mut chosen = edges.len() - 1;
                for (i, e) in edges.iter().enumerate() {
                    acc += e.prob;
                    if draw < acc {
                        chosen = i;
                        break;
                    }
                }
                let e = &edges[chosen];
                self.state = e.to;
                Observation {
                    next_state: e.to,
                    reward: e.reward,
                    discovered: None,
                    was_explore: false,
                }
            }
            EnvAction::Explore => {
                let s = self.state;
                let j = self.undiscovered[s].len();
                if j == 0 {
                    self.failures[s] += 1;
                    return Observation {
                        next_state: s,
                        reward: self.spec.explore_not_found[s],
                        discovered: None,
                        was_explore: true,
                    };
                }
                let p = self.spec.discovery.prob(j as u64, self.failures[s] + 1);
                if self.rng.bernoulli(Stream::Discovery, p) {
                    let pick = self.rng.index(Stream::Reveal, j);
                    let revealed = self.undiscovered[s].remove(pick);
                    self.failures[s] = 0;
                    Observation {
                        next_state: s,
                        reward: self.spec.explore_found[s],
                        discovered: Some(revealed),
                        was_explore: true,
                    }
                } else {
                    self.failures[s] += 1;
                    Observation {
                        next_state: s,
                        reward: self.spec.explore_not_found[s],
                        discovered: None,
                        was_explore: true,
                    }
                }
            }
        }
    }

    pub fn snapshot(&self) -> EnvSnapshot {
        EnvSnapshot {
            state: self.state,
            steps: self.steps,
            failures: self.failures.clone(),
            undiscovered: self.undiscovered.clone(),
            rng: self.rng.clone(),
        }
    }

    pub fn restore(spec: &'a MdpuSpec, snap: EnvSnapshot) -> Self {
        Env {
            spec,
            state: snap.state,
            steps: snap.steps,
            failures: snap.failures,
            undiscovered: snap.undiscovered,
            rng: snap.rng,
        }
    }
}
