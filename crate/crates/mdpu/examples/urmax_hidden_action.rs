//! Learn the two-state scenario whose best action is hidden behind the
//! explore action, with the true parameters declared up front. Prints the
//! event trail for one seed, then a value summary over many seeds.

use mdpu::{execute_policy, load_scenario, opt_oracle, urmax_inner, Env, TraceEvent, UrmaxConfig};

fn main() {
    let path = concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/scenarios/two_state_hidden.json"
    );
    let scenario = load_scenario(path.as_ref()).unwrap();
    let spec = &scenario.spec;
    let know = &scenario.knowledge;
    let cfg = UrmaxConfig {
        n_bound: know.known_n.unwrap(),
        k_bound: know.known_k.unwrap(),
        rmax: know.known_rmax.unwrap(),
        horizon: know.known_horizon.unwrap(),
        eps: 0.1,
        delta: 0.1,
        k0_override: None,
        k1_override: Some(60),
        step_budget: 3_000,
    };
    println!(
        "scenario {}: N = {}, k = {}, Rmax = {}, T = {}",
        scenario.name, cfg.n_bound, cfg.k_bound, cfg.rmax, cfg.horizon
    );

    let mut env = Env::new(spec, 0, 7).unwrap();
    let outcome = urmax_inner(&mut env, &cfg).unwrap();
    println!(
        "seed 7 ended {:?} after {} steps; highlights:",
        outcome.status, outcome.report.steps
    );
    for e in &outcome.report.events {
        match e {
            TraceEvent::Discovery {
                step,
                state,
                revealed,
                ..
            } => {
                println!("  step {step}: explore at {state} revealed {revealed}")
            }
            TraceEvent::DiscoveryKnown { step, state } => {
                println!("  step {step}: explore retired at {state}")
            }
            _ => {}
        }
    }

    let (oracle, _) = opt_oracle(&spec.mdp, 1_000).unwrap();
    let mut near = 0;
    let seeds = 50;
    for seed in 0..seeds {
        let mut env = Env::new(spec, 0, seed).unwrap();
        let outcome = urmax_inner(&mut env, &cfg).unwrap();
        let stats = execute_policy(&mut env, &outcome.report.policy, 1_000, None, None);
        if (stats.average_reward(false) - oracle).abs() <= 0.1 {
            near += 1;
        }
    }
    println!("policy within 0.1 of the oracle ({oracle:.4}) on {near}/{seeds} seeds");
}
