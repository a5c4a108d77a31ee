//! The learner's approximate model: per-pair visit tallies, entries frozen
//! once a pair reaches its visit threshold, and optimistic dummy-state
//! entries everywhere else. Shared by both learning algorithms; the explore
//! pseudo-pairs only exist when an explore threshold is configured.

use crate::mdp::{Edge, MdpSpec};
use crate::model::MdpuSpec;
use crate::trace::InconsistencyKind;
use std::collections::{BTreeMap, BTreeSet};

/// Name of the absorbing optimistic state in planning models.
pub const DUMMY_STATE: &str = "__dummy__";

#[derive(Clone, Debug, Default)]
struct PairStats {
    visits: u64,
    transition_counts: BTreeMap<usize, u64>,
    reward_sums: BTreeMap<usize, f64>,
    /// Empirical entry captured the instant the pair became known:
    /// `(next_state, probability, mean_reward)` rows.
    frozen: Option<Vec<(usize, f64, f64)>>,
}

impl PairStats {
    fn freeze(&mut self) {
        let total = self.visits as f64;
        let edges = self
            .transition_counts
            .iter()
            .map(|(&next, &count)| {
                (
                    next,
                    count as f64 / total,
                    self.reward_sums[&next] / count as f64,
                )
            })
            .collect();
        self.frozen = Some(edges);
    }
}

#[derive(Clone, Debug, Default)]
struct ExploreStats {
    /// Plays since the last discovery at this state.
    plays: u64,
    /// Retired: reached the play threshold with nothing found.
    known: bool,
    /// Most recent failure reward, used for the rare empirical self-loop.
    last_failure_reward: f64,
}

/// What one recorded explore play did to the model.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExploreRecord {
    /// Nothing found, threshold not yet reached.
    Nothing,
    /// Nothing found and the play threshold was just reached: retired.
    BecameKnown,
    /// A hidden action was revealed; counters reset.
    Revealed,
}

/// How the planner should treat one modeled action.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlannedAction {
    /// Ordinary action, by env index at its state.
    Ordinary(usize),
    Explore,
}

/// A planning-ready MDP built from the model, with maps back to env
/// indices. The dummy state is always the last state.
#[derive(Clone, Debug)]
pub struct PlanningModel {
    pub mdp: MdpSpec,
    /// Plan state index → env state index (dummy excluded).
    pub state_map: Vec<usize>,
    pub env_to_plan: BTreeMap<usize, usize>,
    /// Per plan state, what each plan action index means.
    pub actions: Vec<Vec<PlannedAction>>,
}

#[derive(Clone, Debug)]
pub struct ApproxModel {
    rmax: f64,
    k1: u64,
    /// Explore play threshold; `None` disables explore modeling entirely
    /// (the fully-aware baseline).
    explore_k0: Option<u64>,
    states: BTreeSet<usize>,
    aware: BTreeMap<usize, BTreeSet<usize>>,
    pairs: BTreeMap<(usize, usize), PairStats>,
    explore: BTreeMap<usize, ExploreStats>,
    max_seen_reward: f64,
}

impl ApproxModel {
    pub fn new(rmax: f64, k1: u64, explore_k0: Option<u64>) -> Self {
        ApproxModel {
            rmax,
            k1,
            explore_k0,
            states: BTreeSet::new(),
            aware: BTreeMap::new(),
            pairs: BTreeMap::new(),
            explore: BTreeMap::new(),
            max_seen_reward: 0.0,
        }
    }

    pub fn rmax(&self) -> f64 {
        self.rmax
    }

    pub fn k1(&self) -> u64 {
        self.k1
    }

    pub fn explore_k0(&self) -> Option<u64> {
        self.explore_k0
    }

    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    pub fn has_state(&self, s: usize) -> bool {
        self.states.contains(&s)
    }

    /// Env indices of every state the learner has seen, ascending.
    pub fn known_states(&self) -> Vec<usize> {
        self.states.iter().copied().collect()
    }

    pub fn max_seen_reward(&self) -> f64 {
        self.max_seen_reward
    }

    /// Register a state and the actions currently known there. Returns
    /// true when the state is new to the model.
    pub fn ensure_state(&mut self, s: usize, aware_actions: &[usize]) -> bool {
        let new = self.states.insert(s);
        let set = self.aware.entry(s).or_default();
        for &a in aware_actions {
            set.insert(a);
        }
        self.explore.entry(s).or_default();
        new
    }

    /// Make one more action visible at `s` (after a discovery).
    pub fn add_aware_action(&mut self, s: usize, a: usize) {
        self.aware.entry(s).or_default().insert(a);
    }

    pub fn aware_actions_of(&self, s: usize) -> Vec<usize> {
        self.aware
            .get(&s)
            .map(|set| set.iter().copied().collect())
            .unwrap_or_default()
    }

    /// Distinct action names the learner has seen anywhere.
    pub fn distinct_action_names(&self, spec: &MdpuSpec) -> BTreeSet<String> {
        let mut names = BTreeSet::new();
        for (&s, actions) in &self.aware {
            for &a in actions {
                names.insert(spec.mdp.action_name(s, a).to_string());
            }
        }
        names
    }

    pub fn visits(&self, s: usize, a: usize) -> u64 {
        self.pairs.get(&(s, a)).map_or(0, |p| p.visits)
    }

    pub fn is_known(&self, s: usize, a: usize) -> bool {
        self.pairs
            .get(&(s, a))
            .map_or(self.k1 == 0, |p| p.frozen.is_some() || p.visits >= self.k1)
    }

    pub fn explore_plays(&self, s: usize) -> u64 {
        self.explore.get(&s).map_or(0, |e| e.plays)
    }

    pub fn is_explore_known(&self, s: usize) -> bool {
        self.explore
            .get(&s)
            .map_or(self.explore_k0 == Some(0), |e| e.known)
    }

    /// Record one ordinary transition. Returns true exactly when this
    /// observation made the pair known (its entry freezes now).
    pub fn record_transition(&mut self, s: usize, a: usize, next: usize, reward: f64) -> bool {
        if reward > self.max_seen_reward {
            self.max_seen_reward = reward;
        }
        let pair = self.pairs.entry((s, a)).or_default();
        pair.visits += 1;
        *pair.transition_counts.entry(next).or_default() += 1;
        *pair.reward_sums.entry(next).or_default() += reward;
        if pair.frozen.is_none() && self.k1 > 0 && pair.visits >= self.k1 {
            pair.freeze();
            true
        } else {
            false
        }
    }

    /// Record one explore play at `s`.
    pub fn record_explore(
        &mut self,
        s: usize,
        discovered: Option<usize>,
        reward: f64,
    ) -> ExploreRecord {
        let k0 = self.explore_k0.unwrap_or(u64::MAX);
        let stats = self.explore.entry(s).or_default();
        match discovered {
            Some(a) => {
                stats.plays = 0;
                stats.known = false;
                self.aware.entry(s).or_default().insert(a);
                ExploreRecord::Revealed
            }
            None => {
                stats.plays += 1;
                stats.last_failure_reward = reward;
                if !stats.known && stats.plays >= k0 {
                    stats.known = true;
                    ExploreRecord::BecameKnown
                } else {
                    ExploreRecord::Nothing
                }
            }
        }
    }

    /// All ordinary pairs known, and (when explore is modeled) every
    /// state's explore action retired.
    pub fn all_known(&self) -> bool {
        for (&s, actions) in &self.aware {
            for &a in actions {
                if !self.is_known(s, a) {
                    return false;
                }
            }
            if self.explore_k0.is_some() && !self.is_explore_known(s) {
                return false;
            }
        }
        true
    }

    /// First contradiction between recorded experience and the given
    /// parameter guesses, checked in a fixed order.
    pub fn check_inconsistency(
        &self,
        spec: &MdpuSpec,
        n_bound: u64,
        k_bound: u64,
        rmax: f64,
    ) -> Option<(InconsistencyKind, String)> {
        if self.max_seen_reward > rmax {
            return Some((
                InconsistencyKind::RewardExceedsRmax,
                format!(
                    "observed reward {} exceeds the guess {rmax}",
                    self.max_seen_reward
                ),
            ));
        }
        let names = self.distinct_action_names(spec);
        if names.len() as u64 > k_bound {
            return Some((
                InconsistencyKind::TooManyActions,
                format!(
                    "aware of {} distinct actions with guess {k_bound}",
                    names.len()
                ),
            ));
        }
        if self.states.len() as u64 > n_bound {
            return Some((
                InconsistencyKind::TooManyStates,
                format!("aware of {} states with guess {n_bound}", self.states.len()),
            ));
        }
        None
    }

    /// Adopt new thresholds and optimism level, recomputing known flags
    /// and frozen entries from the accumulated tallies.
    pub fn reconfigure(&mut self, rmax: f64, k1: u64, explore_k0: Option<u64>) {
        self.rmax = rmax;
        self.k1 = k1;
        self.explore_k0 = explore_k0;
        for pair in self.pairs.values_mut() {
            if k1 > 0 && pair.visits >= k1 {
                pair.freeze();
            } else {
                pair.frozen = None;
            }
        }
        let k0 = explore_k0.unwrap_or(u64::MAX);
        for stats in self.explore.values_mut() {
            stats.known = stats.plays >= k0;
        }
    }

    /// Forget all tallies but keep awareness (states seen, actions
    /// revealed). The strict-restart reading of the outer loop.
    pub fn clear_statistics(&mut self) {
        self.pairs.clear();
        for stats in self.explore.values_mut() {
            *stats = ExploreStats::default();
        }
        self.max_seen_reward = 0.0;
    }

    /// The optimistic planning MDP: known entries are empirical, unknown
    /// entries lead to the dummy state at full reward, retired explore
    /// actions are left out.
    pub fn build_planning_mdp(&self, spec: &MdpuSpec) -> PlanningModel {
        let state_map: Vec<usize> = self.states.iter().copied().collect();
        let env_to_plan: BTreeMap<usize, usize> = state_map
            .iter()
            .enumerate()
            .map(|(plan, &env)| (env, plan))
            .collect();
        let dummy = state_map.len();

        let mut mdp = MdpSpec::new();
        for &env_s in &state_map {
            mdp.add_state(spec.mdp.state_name(env_s));
        }
        mdp.add_state(DUMMY_STATE);

        let mut actions: Vec<Vec<PlannedAction>> = Vec::with_capacity(state_map.len());
        for (plan_s, &env_s) in state_map.iter().enumerate() {
            let mut here = Vec::new();
            for a in self.aware_actions_of(env_s) {
                let name = spec.mdp.action_name(env_s, a);
                let stats = self.pairs.get(&(env_s, a));
                let frozen = stats.and_then(|p| p.frozen.as_ref());
                let edges = match frozen {
                    Some(rows) => rows
                        .iter()
                        .map(|&(next, prob, reward)| Edge::new(env_to_plan[&next], prob, reward))
                        .collect(),
                    None => vec![Edge::new(dummy, 1.0, self.rmax)],
                };
                mdp.add_action(plan_s, name, edges);
                here.push(PlannedAction::Ordinary(a));
            }
            if self.explore_k0.is_some() {
                let retired = self.is_explore_known(env_s);
                if !retired {
                    mdp.add_action(
                        plan_s,
                        crate::model::EXPLORE_ACTION,
                        vec![Edge::new(dummy, 1.0, self.rmax)],
                    );
                    here.push(PlannedAction::Explore);
                } else if here.is_empty() {
                    // Nothing else is playable here; keep explore as an
                    // empirical self-loop so the state stays planable.
                    let reward = self
                        .explore
                        .get(&env_s)
                        .map_or(0.0, |e| e.last_failure_reward);
                    mdp.add_action(
                        plan_s,
                        crate::model::EXPLORE_ACTION,
                        vec![Edge::new(plan_s, 1.0, reward)],
                    );
                    here.push(PlannedAction::Explore);
                }
            }
            actions.push(here);
        }
        mdp.add_action(dummy, "stay", vec![Edge::new(dummy, 1.0, self.rmax)]);

        PlanningModel {
            mdp,
            state_map,
            env_to_plan,
            actions,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::plan_finite_horizon;
    use crate::model::fixtures::{aware_chain, one_state_hidden};

    fn seeded_chain_model(k1: u64) -> (crate::model::MdpuSpec, ApproxModel) {
        let spec = aware_chain();
        let mut model = ApproxModel::new(2.0, k1, None);
        model.ensure_state(0, &[0, 1]);
        model.ensure_state(1, &[0]);
        (spec, model)
    }

    #[test]
    fn unknown_pairs_plan_to_full_optimism() {
        let (spec, model) = seeded_chain_model(3);
        let planning = model.build_planning_mdp(&spec);
        let plan = plan_finite_horizon(&planning.mdp, 4).unwrap();
        // Every entry is optimistic, so every state is worth T * Rmax.
        assert!((plan.value(0, 0) - 8.0).abs() < 1e-12);
        assert!((plan.value(0, 1) - 8.0).abs() < 1e-12);
    }

    #[test]
    fn pair_freezes_exactly_at_threshold() {
        let (_, mut model) = seeded_chain_model(3);
        assert!(!model.record_transition(0, 0, 0, 1.0));
        assert!(!model.record_transition(0, 0, 0, 1.0));
        assert!(!model.is_known(0, 0));
        assert!(
            model.record_transition(0, 0, 0, 1.0),
            "third visit crosses K1 = 3"
        );
        assert!(model.is_known(0, 0));
        assert!(!model.record_transition(0, 0, 0, 1.0), "already known");
    }

    #[test]
    fn frozen_entry_ignores_later_observations() {
        let spec = aware_chain();
        let (_, mut model) = seeded_chain_model(2);
        model.record_transition(0, 1, 1, 0.0);
        model.record_transition(0, 1, 1, 0.0);
        // Later, contradictory data (would make the edge reward 5).
        model.record_transition(0, 1, 0, 5.0);
        let planning = model.build_planning_mdp(&spec);
        let edges = planning.mdp.edges(planning.env_to_plan[&0], 1);
        assert_eq!(edges.len(), 1);
        assert_eq!(edges[0].reward, 0.0);
    }

    #[test]
    fn known_entries_are_empirical_with_mean_rewards() {
        let (spec, mut model) = seeded_chain_model(4);
        model.record_transition(0, 0, 0, 1.0);
        model.record_transition(0, 0, 1, 3.0);
        model.record_transition(0, 0, 0, 2.0);
        model.record_transition(0, 0, 1, 5.0);
        let planning = model.build_planning_mdp(&spec);
        let edges = planning.mdp.edges(planning.env_to_plan[&0], 0);
        assert_eq!(edges.len(), 2);
        assert!((edges[0].prob - 0.5).abs() < 1e-12);
        assert!((edges[0].reward - 1.5).abs() < 1e-12);
        assert!((edges[1].prob - 0.5).abs() < 1e-12);
        assert!((edges[1].reward - 4.0).abs() < 1e-12);
    }

    #[test]
    fn zero_threshold_means_known_without_data() {
        let (_, model) = seeded_chain_model(0);
        assert!(model.is_known(0, 0));
        assert!(model.all_known());
    }

    #[test]
    fn explore_retires_at_k0_and_resets_on_discovery() {
        let spec = one_state_hidden();
        let mut model = ApproxModel::new(2.0, 1, Some(3));
        model.ensure_state(0, &[0]);
        assert_eq!(model.record_explore(0, None, 0.0), ExploreRecord::Nothing);
        assert_eq!(model.record_explore(0, None, 0.0), ExploreRecord::Nothing);
        assert_eq!(
            model.record_explore(0, None, 0.0),
            ExploreRecord::BecameKnown
        );
        assert!(model.is_explore_known(0));
        // Discovery reopens the budget and reveals the action.
        assert_eq!(
            model.record_explore(0, Some(1), 0.5),
            ExploreRecord::Revealed
        );
        assert!(!model.is_explore_known(0));
        assert_eq!(model.explore_plays(0), 0);
        assert_eq!(model.aware_actions_of(0), vec![0, 1]);
        assert_eq!(model.distinct_action_names(&spec).len(), 2);
    }

    #[test]
    fn planning_model_orders_explore_last_and_retires_it() {
        let spec = one_state_hidden();
        let mut model = ApproxModel::new(2.0, 1, Some(2));
        model.ensure_state(0, &[0]);
        let planning = model.build_planning_mdp(&spec);
        assert_eq!(
            planning.actions[0],
            vec![PlannedAction::Ordinary(0), PlannedAction::Explore]
        );
        model.record_explore(0, None, 0.0);
        model.record_explore(0, None, 0.0);
        let planning = model.build_planning_mdp(&spec);
        assert_eq!(planning.actions[0], vec![PlannedAction::Ordinary(0)]);
    }

    #[test]
    fn retired_explore_survives_as_self_loop_when_it_is_all_there_is() {
        // A state with no aware ordinary actions at all.
        let spec = one_state_hidden();
        let mut model = ApproxModel::new(2.0, 1, Some(1));
        model.ensure_state(0, &[]);
        model.record_explore(0, None, 0.25);
        assert!(model.is_explore_known(0));
        let planning = model.build_planning_mdp(&spec);
        assert_eq!(planning.actions[0], vec![PlannedAction::Explore]);
        let edges = planning.mdp.edges(0, 0);
        assert_eq!(edges[0].to, 0, "self-loop, not dummy");
        assert_eq!(edges[0].reward, 0.25);
    }

    #[test]
    fn optimism_forces_t_rmax_while_explore_unknown() {
        let spec = one_state_hidden();
        let mut model = ApproxModel::new(2.0, 1, Some(50));
        model.ensure_state(0, &[0]);
        // The ordinary action becomes known with its true reward 1.
        model.record_transition(0, 0, 0, 1.0);
        for t in [1usize, 3, 7] {
            let planning = model.build_planning_mdp(&spec);
            let plan = plan_finite_horizon(&planning.mdp, t).unwrap();
            assert!((plan.value(0, 0) - 2.0 * t as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn inconsistency_checks_fire_in_order() {
        let spec = aware_chain();
        let mut model = ApproxModel::new(2.0, 5, Some(5));
        model.ensure_state(0, &[0, 1]);
        model.ensure_state(1, &[0]);
        model.record_transition(0, 0, 0, 1.5);
        assert!(model.check_inconsistency(&spec, 2, 2, 2.0).is_none());
        let (kind, detail) = model.check_inconsistency(&spec, 2, 2, 1.0).unwrap();
        assert_eq!(kind, InconsistencyKind::RewardExceedsRmax);
        assert!(detail.contains("1.5"));
        let (kind, _) = model.check_inconsistency(&spec, 2, 1, 2.0).unwrap();
        assert_eq!(kind, InconsistencyKind::TooManyActions);
        let (kind, _) = model.check_inconsistency(&spec, 1, 2, 2.0).unwrap();
        assert_eq!(kind, InconsistencyKind::TooManyStates);
    }

    #[test]
    fn reconfigure_refreezes_from_tallies() {
        let (_, mut model) = seeded_chain_model(10);
        for _ in 0..4 {
            model.record_transition(0, 0, 0, 1.0);
        }
        assert!(!model.is_known(0, 0));
        model.reconfigure(3.0, 4, None);
        assert!(model.is_known(0, 0));
        assert_eq!(model.rmax(), 3.0);
        model.reconfigure(3.0, 5, None);
        assert!(!model.is_known(0, 0));
    }

    #[test]
    fn clear_statistics_keeps_awareness() {
        let mut model = ApproxModel::new(2.0, 2, Some(2));
        model.ensure_state(0, &[0]);
        model.record_explore(0, Some(1), 0.5);
        model.record_transition(0, 1, 0, 2.0);
        model.clear_statistics();
        assert_eq!(model.aware_actions_of(0), vec![0, 1], "awareness persists");
        assert_eq!(model.visits(0, 1), 0);
        assert_eq!(model.max_seen_reward(), 0.0);
    }

    #[test]
    fn all_known_requires_explore_retirement_too() {
        let mut model = ApproxModel::new(2.0, 1, Some(2));
        model.ensure_state(0, &[0]);
        model.record_transition(0, 0, 0, 1.0);
        assert!(!model.all_known());
        model.record_explore(0, None, 0.0);
        model.record_explore(0, None, 0.0);
        assert!(model.all_known());
    }
}
