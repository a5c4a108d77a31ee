//! The unawareness layer over an [`MdpSpec`]: which states and actions the
//! decision maker starts out knowing, the discovery family governing the
//! explore action, and the explore rewards. Also the decision maker's
//! declarable knowledge and the compatibility check against candidate
//! models.

use crate::discovery::DiscoveryFamily;
use crate::mdp::{validate_spec, MdpSpec, ValidationReport};
use std::collections::{BTreeMap, BTreeSet};

/// Reserved name for the explore action. It is not part of any action set
/// and may not be used as an ordinary action name.
pub const EXPLORE_ACTION: &str = "__explore__";

/// A full MDP plus the awareness structure: initially-known states `S0`,
/// initially-known actions `g0(s)`, the discovery family behind the explore
/// action, and the explore rewards `R+`/`R-` per state.
///
/// The explore action itself is implicit: it is available in every state,
/// never changes the state, and is addressed by [`EXPLORE_ACTION`] rather
/// than an index.
#[derive(Clone, Debug, PartialEq)]
pub struct MdpuSpec {
    pub mdp: MdpSpec,
    /// Sorted state indices the decision maker knows at the start.
    pub aware_states: Vec<usize>,
    /// Per state, sorted indices of initially-known actions. Empty for
    /// states outside `aware_states`.
    pub aware_actions: Vec<Vec<usize>>,
    pub discovery: DiscoveryFamily,
    /// Reward for an explore play that reveals an action, per state.
    pub explore_found: Vec<f64>,
    /// Reward for an explore play that reveals nothing, per state.
    pub explore_not_found: Vec<f64>,
}

impl MdpuSpec {
    pub fn n_states(&self) -> usize {
        self.mdp.n_states()
    }

    pub fn is_aware_state(&self, s: usize) -> bool {
        self.aware_states.binary_search(&s).is_ok()
    }

    /// Actions hidden at `s` before any exploration: all of them for states
    /// outside `S0`, the complement of `g0(s)` inside it.
    pub fn hidden_at(&self, s: usize) -> Vec<usize> {
        let aware: BTreeSet<usize> = self.aware_actions[s].iter().copied().collect();
        (0..self.mdp.n_actions(s))
            .filter(|a| !aware.contains(a))
            .collect()
    }

    /// True when nothing is hidden anywhere (the fully-aware special case
    /// ordinary R-MAX expects).
    pub fn fully_aware(&self) -> bool {
        self.aware_states.len() == self.n_states()
            && (0..self.n_states()).all(|s| self.aware_actions[s].len() == self.mdp.n_actions(s))
    }

    /// Distinct names among initially-known actions (the `|A0|` seed for
    /// outer-loop guessing).
    pub fn initial_action_names(&self) -> BTreeSet<String> {
        let mut names = BTreeSet::new();
        for &s in &self.aware_states {
            for &a in &self.aware_actions[s] {
                names.insert(self.mdp.action_name(s, a).to_string());
            }
        }
        names
    }
}

/// What the decision maker can declare about the world beyond raw
/// awareness: exact state/action counts, a reward ceiling, and a horizon.
/// All four are optional; a fully-informed ("quite knowledgeable") run
/// declares them all.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DmKnowledge {
    pub aware_states: BTreeSet<String>,
    pub aware_actions: BTreeMap<String, BTreeSet<String>>,
    pub known_n: Option<u64>,
    pub known_k: Option<u64>,
    pub known_rmax: Option<f64>,
    pub known_horizon: Option<u64>,
}

impl DmKnowledge {
    /// Awareness sets copied from a spec, with no declared bounds.
    pub fn from_spec(spec: &MdpuSpec) -> Self {
        let mut aware_states = BTreeSet::new();
        let mut aware_actions = BTreeMap::new();
        for &s in &spec.aware_states {
            let name = spec.mdp.state_name(s).to_string();
            let actions: BTreeSet<String> = spec.aware_actions[s]
                .iter()
                .map(|&a| spec.mdp.action_name(s, a).to_string())
                .collect();
            aware_states.insert(name.clone());
            aware_actions.insert(name, actions);
        }
        DmKnowledge {
            aware_states,
            aware_actions,
            ..Default::default()
        }
    }
}

/// Structural validation of the unawareness layer. `declared_rmax` is the
/// scenario's reward ceiling when one was declared; explore rewards must
/// stay strictly below it.
pub fn validate_mdpu(spec: &MdpuSpec, declared_rmax: Option<f64>) -> ValidationReport {
    let mut report = validate_spec(&spec.mdp);
    let n = spec.mdp.n_states();

    for s in 0..n {
        for a in 0..spec.mdp.n_actions(s) {
            if spec.mdp.action_name(s, a) == EXPLORE_ACTION {
                report.error(format!(
                    "state {}: action name {EXPLORE_ACTION} is reserved for the explore action",
                    spec.mdp.state_name(s)
                ));
            }
        }
    }

    if spec.aware_states.is_empty() {
        report.error("aware_states is empty: the decision maker must start somewhere".to_string());
    }
    let mut prev: Option<usize> = None;
    for &s in &spec.aware_states {
        if s >= n {
            report.error(format!("aware state index {s} out of range ({n} states)"));
        }
        if let Some(p) = prev {
            if s <= p {
                report.error(format!(
                    "aware_states must be strictly increasing at index {s}"
                ));
            }
        }
        prev = Some(s);
    }

    if spec.aware_actions.len() != n {
        report.error(format!(
            "aware_actions has {} entries for {n} states",
            spec.aware_actions.len()
        ));
    } else {
        for s in 0..n {
            let aware_here = spec.is_aware_state(s);
            if !aware_here && !spec.aware_actions[s].is_empty() {
                report.error(format!(
                    "state {} is not initially known but has initially-known actions",
                    spec.mdp.state_name(s)
                ));
            }
            let mut prev: Option<usize> = None;
            for &a in &spec.aware_actions[s] {
                if a >= spec.mdp.n_actions(s) {
                    report.error(format!(
                        "state {}: aware action index {a} out of range",
                        spec.mdp.state_name(s)
                    ));
                }
                if let Some(p) = prev {
                    if a <= p {
                        report.error(format!(
                            "state {}: aware actions must be strictly increasing",
                            spec.mdp.state_name(s)
                        ));
                    }
                }
                prev = Some(a);
            }
        }
    }

    for (label, rewards) in [
        ("explore_found", &spec.explore_found),
        ("explore_not_found", &spec.explore_not_found),
    ] {
        if rewards.len() != n {
            report.error(format!(
                "{label} has {} entries for {n} states",
                rewards.len()
            ));
        }
        for (s, r) in rewards.iter().enumerate() {
            if !r.is_finite() {
                report.error(format!("{label}[{s}] is not finite"));
            }
        }
    }
    if spec.explore_found.len() == n && spec.explore_not_found.len() == n {
        for s in 0..n {
            if spec.explore_not_found[s] > spec.explore_found[s] {
                report.error(format!(
                    "state {}: explore_not_found {} exceeds explore_found {}",
                    spec.mdp.state_name(s),
                    spec.explore_not_found[s],
                    spec.explore_found[s]
                ));
            }
            if let Some(rmax) = declared_rmax {
                if spec.explore_found[s] >= rmax {
                    report.error(format!(
                        "state {}: explore_found {} must be strictly below declared rmax {rmax}",
                        spec.mdp.state_name(s),
                        spec.explore_found[s]
                    ));
                }
            }
        }
    }

    report.merge(spec.discovery.validate());
    report
}

/// Could `candidate` be the true world given everything in `knowledge`?
/// True iff the candidate's awareness extends the declared awareness and
/// every declared bound holds: exact state count for `known_n`, exact
/// distinct-action count for `known_k`, all rewards at most `known_rmax`.
/// A declared horizon constrains the learner, not the world, so it is not
/// checked here.
pub fn is_compatible(candidate: &MdpuSpec, knowledge: &DmKnowledge) -> bool {
    for name in &knowledge.aware_states {
        let Some(s) = candidate.mdp.state_index(name) else {
            return false;
        };
        if !candidate.is_aware_state(s) {
            return false;
        }
    }
    for (state, actions) in &knowledge.aware_actions {
        let Some(s) = candidate.mdp.state_index(state) else {
            return false;
        };
        for action in actions {
            let Some(a) = candidate.mdp.action_index(s, action) else {
                return false;
            };
            if !candidate.aware_actions[s].contains(&a) {
                return false;
            }
        }
    }
    if let Some(n) = knowledge.known_n {
        if candidate.mdp.n_states() as u64 != n {
            return false;
        }
    }
    if let Some(k) = knowledge.known_k {
        if candidate.mdp.distinct_action_count() as u64 != k {
            return false;
        }
    }
    if let Some(rmax) = knowledge.known_rmax {
        if candidate.mdp.max_reward() > rmax {
            return false;
        }
    }
    true
}
