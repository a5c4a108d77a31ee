//! The outer guessing loop against a reward the decision maker
//! underestimates: watch rounds fail with inconsistencies until the
//! guesses grow past the truth.

use mdpu::{load_scenario, urmax_outer, Env, OuterConfig};

fn main() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/high_reward.json");
    let scenario = load_scenario(path.as_ref()).unwrap();
    println!(
        "scenario {}: one action paying 3, nothing declared",
        scenario.name
    );

    let outer = OuterConfig {
        eps: 0.5,
        delta: 0.1,
        rounds: 5,
        inner_step_budget: 400,
        total_step_budget: 10_000,
        k0_override: Some(5),
        k1_override: Some(10),
        replay_override: Some(100),
        strict_restart: false,
    };
    let mut env = Env::new(&scenario.spec, 0, 3).unwrap();
    let report = urmax_outer(&mut env, &outer).unwrap();

    for r in &report.rounds {
        let replay = match &r.replay {
            Some(s) => format!(
                "exploited {} steps at average {:.2}",
                s.steps,
                s.average_reward(false)
            ),
            None => "no exploitation".to_string(),
        };
        println!(
            "round {}: guesses (N = {}, k = {}, Rmax = {}, T = {}) -> {:?}; {} learning steps; {}",
            r.round,
            r.params.n,
            r.params.k,
            r.params.rmax,
            r.params.horizon,
            r.status,
            r.learn_steps,
            replay
        );
    }
    println!(
        "first converged round: {:?}; total env steps: {}",
        report.first_converged_round, report.total_steps
    );
}
