//! Drive the hidden-action environment by hand: keep playing the explore
//! action at one state until it reveals something, then inspect what the
//! decision maker can see.

use mdpu::{DiscoveryFamily, Edge, Env, EnvAction, MdpSpec, MdpuSpec};

fn main() {
    let mut mdp = MdpSpec::new();
    let s1 = mdp.add_state("s1");
    mdp.add_action(s1, "safe", vec![Edge::new(s1, 1.0, 1.0)]);
    mdp.add_action(s1, "hidden_a", vec![Edge::new(s1, 1.0, 2.0)]);
    mdp.add_action(s1, "hidden_b", vec![Edge::new(s1, 1.0, 3.0)]);
    let spec = MdpuSpec {
        mdp,
        aware_states: vec![0],
        aware_actions: vec![vec![0]],
        discovery: DiscoveryFamily::Constant { c: 0.25 },
        explore_found: vec![0.5],
        explore_not_found: vec![0.0],
    };

    let mut env = Env::new(&spec, 0, 42).unwrap();
    println!("aware actions at start: {:?}", env.revealed_actions(0));
    println!("hidden actions remaining: {}", env.undiscovered_count(0));

    while !env.fully_discovered() {
        let before = env.failures_at(0);
        let obs = env.step(EnvAction::Explore);
        match obs.discovered {
            Some(a) => println!(
                "step {}: discovery after {} failed plays -> revealed {:?} (reward {})",
                env.steps(),
                before,
                spec.mdp.action_name(0, a),
                obs.reward
            ),
            None => println!(
                "step {}: explore failed (reward {})",
                env.steps(),
                obs.reward
            ),
        }
    }

    println!("aware actions now: {:?}", env.revealed_actions(0));
    let obs = env.step(EnvAction::Act(2));
    println!("playing the best revealed action pays {}", obs.reward);

    let snap = env.snapshot();
    let env2 = Env::restore(&spec, snap.clone());
    println!(
        "snapshot at step {} round-trips: {}",
        env.steps(),
        env2.snapshot() == snap
    );
}
