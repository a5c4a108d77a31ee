//! Seed-sweep experiment runner behind the `run` and `demo` subcommands:
//! loads a scenario, runs one learner per seed, and writes per-seed JSONL
//! traces plus `summary.csv` and `summary.json` into an output directory.
//! Identical plans produce byte-identical artifacts.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::Write as _;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::discovery::DiscoveryFamily;
use crate::env::Env;
use crate::learner::urmax::{urmax_inner, urmax_outer, OuterConfig, UrmaxConfig, UrmaxStatus};
use crate::learner::{execute_policy, rmax::rmax_run, rmax::RmaxParams, LearnedPolicy};
use crate::mdp::opt_oracle;
use crate::rng::CounterRng;
use crate::scenario::{load_scenario, Scenario, ScenarioError};
use crate::trace::TraceEvent;

pub const DEFAULT_EPS: f64 = 0.1;
pub const DEFAULT_DELTA: f64 = 0.1;
pub const DEFAULT_MAX_STEPS: u64 = 10_000;
pub const DEFAULT_REPLAY: u64 = 10_000;
/// Planning cost caps the horizon the oracle is evaluated over.
const ORACLE_HORIZON_CAP: u64 = 10_000;
/// Guess growth is one per round, so this cap never binds at desk scale.
const OUTER_ROUND_CAP: u64 = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algo {
    Rmax,
    UrmaxInner,
    UrmaxOuter,
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Algo::Rmax => write!(f, "rmax"),
            Algo::UrmaxInner => write!(f, "urmax-inner"),
            Algo::UrmaxOuter => write!(f, "urmax-outer"),
        }
    }
}

impl std::str::FromStr for Algo {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rmax" => Ok(Algo::Rmax),
            "urmax-inner" => Ok(Algo::UrmaxInner),
            "urmax-outer" => Ok(Algo::UrmaxOuter),
            other => Err(format!(
                "unknown algorithm {other:?} (expected rmax, urmax-inner, or urmax-outer)"
            )),
        }
    }
}

/// Everything a `run` invocation needs; identical plans produce identical
/// artifacts.
#[derive(Clone, Debug, Serialize)]
pub struct ExperimentPlan {
    pub scenario: PathBuf,
    pub algo: Algo,
    /// Half-open seed range.
    pub seed_start: u64,
    pub seed_end: u64,
    pub k0_override: Option<u64>,
    pub k1_override: Option<u64>,
    /// Evaluation replay length (the formula-free stand-in for K2 + K3).
    pub replay_override: Option<u64>,
    pub max_steps: u64,
    pub include_explore_rewards: bool,
    pub oracle: bool,
    pub out_dir: PathBuf,
}

impl ExperimentPlan {
    fn validate(&self) -> Result<(), HarnessError> {
        if self.seed_start >= self.seed_end {
            return Err(HarnessError::Usage(format!(
                "seed range {}..{} is empty",
                self.seed_start, self.seed_end
            )));
        }
        if self.max_steps == 0 {
            return Err(HarnessError::Usage("--max-steps must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{0}")]
    Scenario(#[from] ScenarioError),
    #[error("{0}")]
    Usage(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

/// One summary line per seed.
#[derive(Clone, Debug, Serialize)]
pub struct SeedRow {
    pub seed: u64,
    /// Total env steps consumed, learning and evaluation included.
    pub steps: u64,
    pub avg_reward: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub regret: Option<f64>,
    pub discoveries: u64,
    /// Env step of each discovery, in order.
    pub discovery_times: Vec<u64>,
    pub inconsistencies: u64,
    pub inconsistency_counts: BTreeMap<String, u64>,
    pub rounds: u64,
    /// First converged outer round; 0 for single runs that converged.
    pub convergence_round: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fault: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Aggregates {
    /// Over seeds that completed without fault.
    pub mean_avg_reward: f64,
    pub p10_avg_reward: f64,
    pub p50_avg_reward: f64,
    pub p90_avg_reward: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub plan: ExperimentPlan,
    pub scenario_name: String,
    pub oracle_value: Option<f64>,
    pub rows: Vec<SeedRow>,
    pub aggregates: Aggregates,
    pub faults: Vec<String>,
}

impl Summary {
    pub fn any_fault(&self) -> bool {
        !self.faults.is_empty()
    }
}

struct SeedOutcome {
    steps: u64,
    avg_reward: f64,
    rounds: u64,
    convergence_round: Option<u64>,
    events: Vec<TraceEvent>,
}

fn run_one_seed(
    scenario: &Scenario,
    plan: &ExperimentPlan,
    seed: u64,
) -> Result<SeedOutcome, HarnessError> {
    let spec = &scenario.spec;
    let know = &scenario.knowledge;
    let start = spec.aware_states[0];
    let mut env = Env::new(spec, start, seed).map_err(|e| HarnessError::Usage(e.to_string()))?;
    let replay_len = plan.replay_override.unwrap_or(DEFAULT_REPLAY);

    let (policy, rounds, convergence_round, mut events): (
        LearnedPolicy,
        u64,
        Option<u64>,
        Vec<TraceEvent>,
    ) = match plan.algo {
        Algo::Rmax => {
            let params = RmaxParams {
                rmax: know.known_rmax.unwrap_or_else(|| spec.mdp.max_reward()),
                horizon: know.known_horizon.unwrap_or(1),
                eps: DEFAULT_EPS,
                delta: DEFAULT_DELTA,
                k1_override: plan.k1_override,
                step_budget: plan.max_steps,
            };
            let report =
                rmax_run(&mut env, &params).map_err(|e| HarnessError::Usage(e.to_string()))?;
            let round = if report.converged { Some(0) } else { None };
            (report.policy, 1, round, report.events)
        }
        Algo::UrmaxInner => {
            let missing = |what: &str| {
                HarnessError::Usage(format!(
                    "urmax-inner needs declared knowledge {what} in the scenario"
                ))
            };
            let cfg = UrmaxConfig {
                n_bound: know.known_n.ok_or_else(|| missing("N"))?,
                k_bound: know.known_k.ok_or_else(|| missing("k"))?,
                rmax: know.known_rmax.ok_or_else(|| missing("rmax"))?,
                horizon: know.known_horizon.ok_or_else(|| missing("T"))?,
                eps: DEFAULT_EPS,
                delta: DEFAULT_DELTA,
                k0_override: plan.k0_override,
                k1_override: plan.k1_override,
                step_budget: plan.max_steps,
            };
            let outcome =
                urmax_inner(&mut env, &cfg).map_err(|e| HarnessError::Usage(e.to_string()))?;
            let round = match outcome.status {
                UrmaxStatus::Converged => Some(0),
                _ => None,
            };
            let mut events = outcome.report.events;
            let mut model = outcome.report.model;
            let stats = execute_policy(
                &mut env,
                &outcome.report.policy,
                replay_len,
                Some(&mut model),
                Some(&mut events),
            );
            let avg = stats.average_reward(plan.include_explore_rewards);
            return Ok(SeedOutcome {
                steps: env.steps(),
                avg_reward: avg,
                rounds: 1,
                convergence_round: round,
                events,
            });
        }
        Algo::UrmaxOuter => {
            let outer = OuterConfig {
                eps: DEFAULT_EPS,
                delta: DEFAULT_DELTA,
                rounds: OUTER_ROUND_CAP,
                inner_step_budget: plan.max_steps,
                total_step_budget: plan.max_steps,
                k0_override: plan.k0_override,
                k1_override: plan.k1_override,
                replay_override: plan.replay_override,
                strict_restart: false,
            };
            let report =
                urmax_outer(&mut env, &outer).map_err(|e| HarnessError::Usage(e.to_string()))?;
            (
                report.policy,
                report.rounds.len() as u64,
                report.first_converged_round,
                report.events,
            )
        }
    };

    let stats = execute_policy(&mut env, &policy, replay_len, None, Some(&mut events));
    Ok(SeedOutcome {
        steps: env.steps(),
        avg_reward: stats.average_reward(plan.include_explore_rewards),
        rounds,
        convergence_round,
        events,
    })
}

fn fault_message(payload: Box<dyn std::any::Any + Send>) -> String {
    if let Some(s) = payload.downcast_ref::<&str>() {
        (*s).to_string()
    } else if let Some(s) = payload.downcast_ref::<String>() {
        s.clone()
    } else {
        "panic with non-string payload".to_string()
    }
}

fn nearest_rank(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let rank = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[rank - 1]
}

fn aggregate(rows: &[SeedRow]) -> Aggregates {
    let mut values: Vec<f64> = rows
        .iter()
        .filter(|r| r.fault.is_none())
        .map(|r| r.avg_reward)
        .collect();
    values.sort_by(f64::total_cmp);
    let mean = if values.is_empty() {
        f64::NAN
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    };
    Aggregates {
        mean_avg_reward: mean,
        p10_avg_reward: nearest_rank(&values, 0.10),
        p50_avg_reward: nearest_rank(&values, 0.50),
        p90_avg_reward: nearest_rank(&values, 0.90),
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), HarnessError> {
    let mut f = fs::File::create(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    f.write_all(contents.as_bytes())
        .map_err(|source| HarnessError::Io {
            path: path.to_path_buf(),
            source,
        })?;
    Ok(())
}

fn csv_text(rows: &[SeedRow], with_regret: bool) -> String {
    let mut out = String::new();
    if with_regret {
        out.push_str("seed,steps,avg_reward,regret,discoveries,inconsistencies,rounds\n");
    } else {
        out.push_str("seed,steps,avg_reward,discoveries,inconsistencies,rounds\n");
    }
    for r in rows {
        out.push_str(&format!("{},{},{}", r.seed, r.steps, r.avg_reward));
        if with_regret {
            out.push_str(&format!(",{}", r.regret.unwrap_or(f64::NAN)));
        }
        out.push_str(&format!(
            ",{},{},{}\n",
            r.discoveries, r.inconsistencies, r.rounds
        ));
    }
    out
}

/// Run every seed in the plan, write `trace-<seed>.jsonl` per seed plus
/// `summary.csv` and `summary.json`, and return the summary. Per-seed
/// panics are recorded as faults and the sweep continues.
pub fn run_experiment(plan: &ExperimentPlan) -> Result<Summary, HarnessError> {
    plan.validate()?;
    let scenario = load_scenario(&plan.scenario)?;
    if plan.algo == Algo::Rmax && !scenario.spec.fully_aware() {
        return Err(HarnessError::Usage(format!(
            "scenario {} has hidden actions; rmax needs full awareness",
            scenario.name
        )));
    }
    fs::create_dir_all(&plan.out_dir).map_err(|source| HarnessError::Io {
        path: plan.out_dir.clone(),
        source,
    })?;

    let oracle_value = if plan.oracle {
        let horizon = plan
            .replay_override
            .unwrap_or(DEFAULT_REPLAY)
            .clamp(1, ORACLE_HORIZON_CAP);
        let (value, _) = opt_oracle(&scenario.spec.mdp, horizon as usize)
            .map_err(|e| HarnessError::Usage(e.to_string()))?;
        Some(value)
    } else {
        None
    };

    let mut rows = Vec::new();
    let mut faults = Vec::new();
    for seed in plan.seed_start..plan.seed_end {
        let result = catch_unwind(AssertUnwindSafe(|| run_one_seed(&scenario, plan, seed)));
        let mut row = SeedRow {
            seed,
            steps: 0,
            avg_reward: f64::NAN,
            regret: oracle_value.map(|_| f64::NAN),
            discoveries: 0,
            discovery_times: Vec::new(),
            inconsistencies: 0,
            inconsistency_counts: BTreeMap::new(),
            rounds: 0,
            convergence_round: None,
            fault: None,
        };
        match result {
            Ok(Ok(outcome)) => {
                row.steps = outcome.steps;
                row.avg_reward = outcome.avg_reward;
                row.regret = oracle_value.map(|v| v - outcome.avg_reward);
                row.rounds = outcome.rounds;
                row.convergence_round = outcome.convergence_round;
                for e in &outcome.events {
                    match e {
                        TraceEvent::Discovery { step, .. } => {
                            row.discoveries += 1;
                            row.discovery_times.push(*step);
                        }
                        TraceEvent::Inconsistency { kind, .. } => {
                            row.inconsistencies += 1;
                            *row.inconsistency_counts
                                .entry(kind.to_string())
                                .or_insert(0) += 1;
                        }
                        _ => {}
                    }
                }
                let mut text = String::new();
                for e in &outcome.events {
                    text.push_str(&e.to_json());
                    text.push('\n');
                }
                write_file(&plan.out_dir.join(format!("trace-{seed}.jsonl")), &text)?;
            }
            Ok(Err(e)) => return Err(e),
            Err(payload) => {
                let message = fault_message(payload);
                faults.push(format!("seed {seed}: {message}"));
                row.fault = Some(message);
            }
        }
        rows.push(row);
    }

    let summary = Summary {
        plan: plan.clone(),
        scenario_name: scenario.name.clone(),
        oracle_value,
        aggregates: aggregate(&rows),
        rows,
        faults,
    };
    write_file(
        &plan.out_dir.join("summary.csv"),
        &csv_text(&summary.rows, plan.oracle),
    )?;
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    write_file(&plan.out_dir.join("summary.json"), &(json + "\n"))?;
    Ok(summary)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct DemoRow {
    pub t: u64,
    pub empirical: f64,
    pub closed_form: f64,
}

/// Log-spaced grid 1, 2, 3, 5, 10, 20, ... capped at `horizon`, with the
/// horizon itself always included.
fn demo_grid(horizon: u64) -> Vec<u64> {
    let mut grid = Vec::new();
    let mut scale = 1u64;
    'outer: loop {
        for mult in [1, 2, 3, 5] {
            let t = mult * scale;
            if t > horizon {
                break 'outer;
            }
            grid.push(t);
        }
        match scale.checked_mul(10) {
            Some(next) => scale = next,
            None => break,
        }
    }
    if grid.last() != Some(&horizon) {
        grid.push(horizon);
    }
    grid
}

/// Simulate repeated explore plays against the power(2) discovery law and
/// tabulate the fraction of trials that still have not discovered after t
/// plays, next to the closed form (t+2)/(2(t+1)).
pub fn demo_example1(trials: u64, horizon: u64) -> Result<Vec<DemoRow>, HarnessError> {
    if trials == 0 {
        return Err(HarnessError::Usage("--trials must be at least 1".into()));
    }
    if horizon == 0 {
        return Err(HarnessError::Usage("--horizon must be at least 1".into()));
    }
    let family = DiscoveryFamily::Power { alpha: 2.0 };
    let grid = demo_grid(horizon);
    // survivors[i] counts trials with no discovery in the first grid[i]
    // plays.
    let mut survivors = vec![0u64; grid.len()];
    for trial in 0..trials {
        let mut rng = CounterRng::new(trial);
        let mut discovered_at = horizon + 1;
        for t in 1..=horizon {
            if rng.bernoulli(crate::rng::Stream::Discovery, family.prob(1, t)) {
                discovered_at = t;
                break;
            }
        }
        for (i, &t) in grid.iter().enumerate() {
            if discovered_at > t {
                survivors[i] += 1;
            }
        }
    }
    Ok(grid
        .iter()
        .zip(&survivors)
        .map(|(&t, &n)| DemoRow {
            t,
            empirical: n as f64 / trials as f64,
            closed_form: (t as f64 + 2.0) / (2.0 * (t as f64 + 1.0)),
        })
        .collect())
}

pub fn demo_csv(rows: &[DemoRow]) -> String {
    let mut out = String::from("t,empirical,closed_form\n");
    for r in rows {
        out.push_str(&format!("{},{},{}\n", r.t, r.empirical, r.closed_form));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_log_spaced_and_ends_at_horizon() {
        assert_eq!(demo_grid(10), vec![1, 2, 3, 5, 10]);
        assert_eq!(demo_grid(40), vec![1, 2, 3, 5, 10, 20, 30, 40]);
        assert_eq!(demo_grid(1), vec![1]);
        assert_eq!(demo_grid(10_000).last(), Some(&10_000));
    }

    #[test]
    fn demo_matches_closed_form_at_small_t() {
        let rows = demo_example1(20_000, 10).unwrap();
        let r1 = rows.iter().find(|r| r.t == 1).unwrap();
        assert!((r1.closed_form - 0.75).abs() < 1e-12);
        // 3 sigma for 20k Bernoulli(0.75) trials.
        assert!((r1.empirical - 0.75).abs() < 3.0 * (0.75f64 * 0.25 / 20_000.0).sqrt());
        let r10 = rows.iter().find(|r| r.t == 10).unwrap();
        assert!((r10.closed_form - 6.0 / 11.0).abs() < 1e-12);
        assert!((r10.empirical - 6.0 / 11.0).abs() < 3.0 * (0.5455f64 * 0.4545 / 20_000.0).sqrt());
    }

    #[test]
    fn quantiles_use_nearest_rank() {
        let sorted = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(nearest_rank(&sorted, 0.10), 1.0);
        assert_eq!(nearest_rank(&sorted, 0.50), 2.0);
        assert_eq!(nearest_rank(&sorted, 0.90), 4.0);
        assert!(nearest_rank(&[], 0.5).is_nan());
    }

    #[test]
    fn empty_seed_range_is_rejected() {
        let plan = ExperimentPlan {
            scenario: PathBuf::from("nowhere.json"),
            algo: Algo::Rmax,
            seed_start: 5,
            seed_end: 5,
            k0_override: None,
            k1_override: None,
            replay_override: None,
            max_steps: 10,
            include_explore_rewards: false,
            oracle: false,
            out_dir: PathBuf::from("out"),
        };
        assert!(matches!(run_experiment(&plan), Err(HarnessError::Usage(_))));
    }
}
