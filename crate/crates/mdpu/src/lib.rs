#![forbid(unsafe_code)]

//! Markov decision processes with unawareness (MDPUs): a decision maker who
//! may not know all available actions or states, an explore action that
//! reveals them stochastically, and the learning algorithms plus bound
//! calculators built around that model.
//!
//! Start with the runnable examples:
//!
//! ```text
//! cargo run --example plan_and_evaluate
//! cargo run --example discovery_families
//! cargo run --example explore_simulation
//! cargo run --example rmax_chain
//! cargo run --example urmax_hidden_action
//! cargo run --example urmax_guessing
//! cargo run --example bounds_calculator
//! cargo run --example scenario_files
//! ```
//!
//! The `mdpu` binary wraps the same machinery behind `validate`, `run`,
//! `demo`, and `theory` subcommands for scripted use.

pub mod bounds;
pub mod cli;
pub mod discovery;
pub mod env;
pub mod harness;
pub mod learner;
pub mod mdp;
pub mod model;
pub mod rng;
pub mod scenario;
pub mod trace;

pub use bounds::{
    bound_set, impossibility_gap, k0, k0_upper_bound_check, k1_rmax, k1_urmax, k2_k3,
    lower_bound_steps, verify_lower_bound, BoundSet, BoundValue, Gap, GrowthBound, TheoryError,
};
pub use discovery::{DiscoveryFamily, Divergence, DivergenceClass, NondiscoveryProduct};
pub use env::{Env, EnvAction, EnvError, EnvSnapshot, Observation};
pub use harness::{
    demo_csv, demo_example1, run_experiment, Algo, DemoRow, ExperimentPlan, HarnessError, Summary,
};
pub use learner::approx::{ApproxModel, PlannedAction, PlanningModel, DUMMY_STATE};
pub use learner::policy::LearnedPolicy;
pub use learner::rmax::{rmax_run, RmaxParams};
pub use learner::urmax::{
    urmax_inner, urmax_outer, OuterConfig, OuterReport, RoundRecord, UrmaxConfig, UrmaxOutcome,
    UrmaxStatus,
};
pub use learner::{execute_policy, LearnerError, ReplayStats, RunReport};
pub use mdp::{
    evaluate_policy, opt_oracle, plan_finite_horizon, validate_spec, Edge, HorizonPlan, MdpError,
    MdpSpec, StationaryPolicy, ValidationReport,
};
pub use model::{is_compatible, validate_mdpu, DmKnowledge, MdpuSpec, EXPLORE_ACTION};
pub use rng::{CounterRng, Stream};
pub use scenario::{load_scenario, parse_scenario, Scenario, ScenarioError};
pub use trace::{event_from_observation, InconsistencyKind, RoundParams, TraceEvent};
