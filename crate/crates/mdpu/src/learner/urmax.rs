//! The unawareness-tolerant learner. The inner loop runs against fixed
//! parameter guesses, treating the explore action as one more optimistic
//! pseudo-pair with its own play threshold, and aborts the moment an
//! observation contradicts the guesses. The outer loop grows all four
//! guesses in lockstep round by round, exploiting between rounds.

use super::approx::{ApproxModel, ExploreRecord, PlannedAction};
use super::policy::LearnedPolicy;
use super::{execute_policy, LearnerError, ReplayStats, RunReport};
use crate::bounds::{k0, k1_urmax, k2_k3, BoundValue, TheoryError};
use crate::env::{Env, EnvAction};
use crate::mdp::plan_finite_horizon;
use crate::model::MdpuSpec;
use crate::trace::{event_from_observation, RoundParams, TraceEvent};

/// Fixed parameter guesses for one inner run.
#[derive(Clone, Debug)]
pub struct UrmaxConfig {
    /// Upper bound guess on the number of states.
    pub n_bound: u64,
    /// Upper bound guess on the number of distinct actions.
    pub k_bound: u64,
    /// Reward ceiling guess.
    pub rmax: f64,
    /// Planning horizon T.
    pub horizon: u64,
    pub eps: f64,
    pub delta: f64,
    /// Explore play threshold override (formula value otherwise).
    pub k0_override: Option<u64>,
    /// Visit threshold override (formula value otherwise).
    pub k1_override: Option<u64>,
    pub step_budget: u64,
}

impl UrmaxConfig {
    fn validate(&self) -> Result<(), TheoryError> {
        for (name, v) in [
            ("N", self.n_bound),
            ("k", self.k_bound),
            ("T", self.horizon),
        ] {
            if v == 0 {
                return Err(TheoryError::BadInput(format!("{name} must be at least 1")));
            }
        }
        if !(self.rmax.is_finite() && self.rmax > 0.0) {
            return Err(TheoryError::BadInput(format!(
                "Rmax must be positive, got {}",
                self.rmax
            )));
        }
        if !(self.eps.is_finite() && self.eps > 0.0) {
            return Err(TheoryError::BadInput(format!(
                "eps must be positive, got {}",
                self.eps
            )));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(TheoryError::BadInput(format!(
                "delta must lie in (0, 1), got {}",
                self.delta
            )));
        }
        Ok(())
    }

    fn resolve_k1(&self) -> Result<u64, TheoryError> {
        match self.k1_override {
            Some(v) => Ok(v),
            None => Ok(k1_urmax(
                self.n_bound,
                self.k_bound,
                self.horizon,
                self.rmax,
                self.eps,
                self.delta,
            )?
            .as_finite()
            .unwrap_or(u64::MAX)),
        }
    }

    fn resolve_k0(&self, spec: &MdpuSpec) -> Result<u64, TheoryError> {
        match self.k0_override {
            Some(v) => Ok(v),
            None => Ok(k0(&spec.discovery, self.n_bound, self.delta)?
                .as_finite()
                .unwrap_or(u64::MAX)),
        }
    }
}

/// How an inner run ended.
#[derive(Clone, Debug, PartialEq)]
pub enum UrmaxStatus {
    /// Every pair, explore pairs included, reached its threshold.
    Converged,
    /// An observation contradicted the guesses; the detail names it.
    Inconsistent {
        kind: crate::trace::InconsistencyKind,
        detail: String,
    },
    BudgetExhausted,
}

#[derive(Clone, Debug)]
pub struct UrmaxOutcome {
    pub status: UrmaxStatus,
    pub report: RunReport,
}

/// One inner run against `model` (which persists across outer rounds).
/// Returns the status and the env steps consumed.
pub(crate) fn inner_loop(
    env: &mut Env,
    cfg: &UrmaxConfig,
    model: &mut ApproxModel,
    events: &mut Vec<TraceEvent>,
) -> (UrmaxStatus, u64) {
    let spec = env.spec();
    let here = env.current_state();
    model.ensure_state(here, &env.revealed_actions(here));
    let mut steps = 0u64;
    let status = 'learn: loop {
        if let Some((kind, detail)) =
            model.check_inconsistency(spec, cfg.n_bound, cfg.k_bound, cfg.rmax)
        {
            events.push(TraceEvent::Inconsistency {
                step: env.steps(),
                kind,
                detail: detail.clone(),
            });
            break UrmaxStatus::Inconsistent { kind, detail };
        }
        if model.all_known() {
            break UrmaxStatus::Converged;
        }
        if steps >= cfg.step_budget {
            break UrmaxStatus::BudgetExhausted;
        }
        let planning = model.build_planning_mdp(spec);
        let plan = plan_finite_horizon(&planning.mdp, cfg.horizon as usize)
            .expect("planning model is well-formed by construction");
        events.push(TraceEvent::Replan {
            step: env.steps(),
            state: spec.mdp.state_name(env.current_state()).to_string(),
        });
        for m in 0..cfg.horizon {
            if steps >= cfg.step_budget {
                continue 'learn;
            }
            let s = env.current_state();
            let plan_s = planning.env_to_plan[&s];
            let pa = planning.actions[plan_s][plan.action(m as usize, plan_s)];
            let act = match pa {
                PlannedAction::Ordinary(a) => EnvAction::Act(a),
                PlannedAction::Explore => EnvAction::Explore,
            };
            let obs = env.step(act);
            steps += 1;
            events.push(event_from_observation(spec, env.steps(), s, act, &obs));
            match act {
                EnvAction::Act(a) => {
                    let became = model.record_transition(s, a, obs.next_state, obs.reward);
                    let new_state = !model.has_state(obs.next_state);
                    if new_state {
                        model.ensure_state(obs.next_state, &env.revealed_actions(obs.next_state));
                    }
                    if obs.reward > cfg.rmax || new_state {
                        // The loop top reports the inconsistency, or
                        // replans with the newly seen state.
                        continue 'learn;
                    }
                    if became {
                        events.push(TraceEvent::KnownPair {
                            step: env.steps(),
                            state: spec.mdp.state_name(s).to_string(),
                            action: spec.mdp.action_name(s, a).to_string(),
                        });
                        continue 'learn;
                    }
                }
                EnvAction::Explore => match model.record_explore(s, obs.discovered, obs.reward) {
                    ExploreRecord::Revealed => continue 'learn,
                    ExploreRecord::BecameKnown => {
                        events.push(TraceEvent::DiscoveryKnown {
                            step: env.steps(),
                            state: spec.mdp.state_name(s).to_string(),
                        });
                        continue 'learn;
                    }
                    ExploreRecord::Nothing => {}
                },
            }
        }
    };
    (status, steps)
}

fn policy_from(spec: &MdpuSpec, model: &ApproxModel, horizon: u64) -> LearnedPolicy {
    let planning = model.build_planning_mdp(spec);
    let plan = plan_finite_horizon(&planning.mdp, horizon as usize)
        .expect("planning model is well-formed by construction");
    LearnedPolicy::from_plan(&planning, &plan)
}

/// One learning run with known (or guessed) parameters.
pub fn urmax_inner(env: &mut Env, cfg: &UrmaxConfig) -> Result<UrmaxOutcome, LearnerError> {
    cfg.validate()?;
    let spec = env.spec();
    let k1 = cfg.resolve_k1()?;
    let k0v = cfg.resolve_k0(spec)?;
    if cfg.k1_override.is_some() || cfg.k0_override.is_some() {
        let k1f = k1_urmax(
            cfg.n_bound,
            cfg.k_bound,
            cfg.horizon,
            cfg.rmax,
            cfg.eps,
            cfg.delta,
        )?;
        let k0f = k0(&spec.discovery, cfg.n_bound, cfg.delta)?;
        let (k2f, k3f) = k2_k3(
            cfg.n_bound,
            cfg.k_bound,
            cfg.horizon,
            cfg.rmax,
            cfg.eps,
            cfg.delta,
            &k0f,
        )?;
        log::info!(
            "formula thresholds K0 = {k0f}, K1 = {k1f}, K2 = {k2f}, K3 = {k3f}; running with K0 = {k0v}, K1 = {k1}"
        );
    }
    let mut model = ApproxModel::new(cfg.rmax, k1, Some(k0v));
    for &s in &spec.aware_states {
        model.ensure_state(s, &env.revealed_actions(s));
    }
    let mut events = Vec::new();
    let (status, steps) = inner_loop(env, cfg, &mut model, &mut events);
    let policy = policy_from(spec, &model, cfg.horizon);
    let converged = matches!(status, UrmaxStatus::Converged);
    Ok(UrmaxOutcome {
        status,
        report: RunReport {
            steps,
            converged,
            events,
            policy,
            model,
        },
    })
}

/// Outer-loop configuration: everything except the guesses, which start at
/// what the decision maker can see and grow by one per round.
#[derive(Clone, Debug)]
pub struct OuterConfig {
    pub eps: f64,
    pub delta: f64,
    /// How many rounds to run (guesses grow by one each round, converged
    /// or not).
    pub rounds: u64,
    /// Env-step budget for each round's learning phase.
    pub inner_step_budget: u64,
    /// Cap on total env steps across all learning and exploitation.
    pub total_step_budget: u64,
    pub k0_override: Option<u64>,
    pub k1_override: Option<u64>,
    /// Exploitation length override; the formula value K2 + K3 otherwise.
    pub replay_override: Option<u64>,
    /// Discard tallies between rounds instead of reusing them (the
    /// literal restart reading). Awareness persists either way.
    pub strict_restart: bool,
}

/// What one outer round did.
#[derive(Clone, Debug)]
pub struct RoundRecord {
    pub round: u64,
    pub params: RoundParams,
    pub status: UrmaxStatus,
    /// Formula values for the record; overrides may have been used.
    pub k0_formula: BoundValue,
    pub k1_formula: BoundValue,
    pub k2_formula: BoundValue,
    pub k3_formula: BoundValue,
    pub learn_steps: u64,
    /// Exploitation stats; absent when the round ended inconsistent or
    /// out of budget.
    pub replay: Option<ReplayStats>,
}

#[derive(Clone, Debug)]
pub struct OuterReport {
    pub rounds: Vec<RoundRecord>,
    pub events: Vec<TraceEvent>,
    pub total_steps: u64,
    pub policy: LearnedPolicy,
    pub model: ApproxModel,
    pub first_converged_round: Option<u64>,
}

/// Run rounds of guess-then-learn-then-exploit. Round r uses guesses
/// `(|S0| + r, |A0| + r, 1 + r, 1 + r)` for (N, k, Rmax, T). Awareness
/// always persists across rounds; tallies persist too unless
/// `strict_restart` is set.
pub fn urmax_outer(env: &mut Env, outer: &OuterConfig) -> Result<OuterReport, LearnerError> {
    if outer.rounds == 0 {
        return Err(TheoryError::BadInput("rounds must be at least 1".into()).into());
    }
    let spec = env.spec();
    let n_start = spec.aware_states.len() as u64;
    let k_start = (spec.initial_action_names().len() as u64).max(1);

    let mut model_slot: Option<ApproxModel> = None;
    let mut events: Vec<TraceEvent> = Vec::new();
    let mut rounds: Vec<RoundRecord> = Vec::new();
    let mut used = 0u64;
    let mut last_horizon = 1u64;

    for round in 0..outer.rounds {
        let params = RoundParams {
            n: n_start + round,
            k: k_start + round,
            rmax: (1 + round) as f64,
            horizon: 1 + round,
        };
        last_horizon = params.horizon;
        events.push(TraceEvent::RoundStart { round, params });

        let k1_formula = k1_urmax(
            params.n,
            params.k,
            params.horizon,
            params.rmax,
            outer.eps,
            outer.delta,
        )?;
        let k0_formula = k0(&spec.discovery, params.n, outer.delta)?;
        let (k2_formula, k3_formula) = k2_k3(
            params.n,
            params.k,
            params.horizon,
            params.rmax,
            outer.eps,
            outer.delta,
            &k0_formula,
        )?;
        let k1_resolved = outer
            .k1_override
            .unwrap_or_else(|| k1_formula.as_finite().unwrap_or(u64::MAX));
        let k0_resolved = outer
            .k0_override
            .unwrap_or_else(|| k0_formula.as_finite().unwrap_or(u64::MAX));
        log::info!(
            "round {round}: guesses N = {}, k = {}, Rmax = {}, T = {}; formula K0 = {k0_formula}, K1 = {k1_formula}, K2 = {k2_formula}, K3 = {k3_formula}",
            params.n, params.k, params.rmax, params.horizon
        );

        let model = match &mut model_slot {
            None => {
                let mut m = ApproxModel::new(params.rmax, k1_resolved, Some(k0_resolved));
                for &s in &spec.aware_states {
                    m.ensure_state(s, &env.revealed_actions(s));
                }
                model_slot.insert(m)
            }
            Some(m) => {
                if outer.strict_restart {
                    m.clear_statistics();
                }
                m.reconfigure(params.rmax, k1_resolved, Some(k0_resolved));
                // Anything revealed while exploiting last round is part
                // of the decision maker's awareness now.
                for s in m.known_states() {
                    for a in env.revealed_actions(s) {
                        m.add_aware_action(s, a);
                    }
                }
                m
            }
        };

        let cfg = UrmaxConfig {
            n_bound: params.n,
            k_bound: params.k,
            rmax: params.rmax,
            horizon: params.horizon,
            eps: outer.eps,
            delta: outer.delta,
            k0_override: Some(k0_resolved),
            k1_override: Some(k1_resolved),
            step_budget: outer
                .inner_step_budget
                .min(outer.total_step_budget.saturating_sub(used)),
        };
        let (status, learn_steps) = inner_loop(env, &cfg, model, &mut events);
        used += learn_steps;

        let mut replay = None;
        if matches!(status, UrmaxStatus::Converged) {
            let policy = policy_from(spec, model, params.horizon);
            let formula_len = match (k2_formula, k3_formula) {
                (BoundValue::Finite { value: a }, BoundValue::Finite { value: b }) => {
                    a.saturating_add(b)
                }
                _ => u64::MAX,
            };
            let len = outer
                .replay_override
                .unwrap_or(formula_len)
                .min(outer.total_step_budget.saturating_sub(used));
            let stats = execute_policy(env, &policy, len, Some(model), Some(&mut events));
            used += stats.steps;
            replay = Some(stats);
        }

        rounds.push(RoundRecord {
            round,
            params,
            status,
            k0_formula,
            k1_formula,
            k2_formula,
            k3_formula,
            learn_steps,
            replay,
        });
        if used >= outer.total_step_budget {
            break;
        }
    }

    let first_converged_round = rounds
        .iter()
        .find(|r| matches!(r.status, UrmaxStatus::Converged))
        .map(|r| r.round);
    let model = model_slot.expect("at least one round ran");
    let policy = policy_from(spec, &model, last_horizon);
    Ok(OuterReport {
        rounds,
        events,
        total_steps: used,
        policy,
        model,
        first_converged_round,
    })
}
