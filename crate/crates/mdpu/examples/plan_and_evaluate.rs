//! Build a small MDP by hand, plan over a finite horizon, and compare a
//! fixed policy against the planning oracle.

use mdpu::{evaluate_policy, opt_oracle, plan_finite_horizon, Edge, MdpSpec, StationaryPolicy};

fn main() {
    let mut mdp = MdpSpec::new();
    let s1 = mdp.add_state("s1");
    let s2 = mdp.add_state("s2");
    mdp.add_action(s1, "stay", vec![Edge::new(s1, 1.0, 1.0)]);
    mdp.add_action(
        s1,
        "hop",
        vec![Edge::new(s2, 0.9, 0.0), Edge::new(s1, 0.1, 0.0)],
    );
    mdp.add_action(s2, "stay", vec![Edge::new(s2, 1.0, 2.0)]);
    mdp.add_action(s2, "back", vec![Edge::new(s1, 1.0, 0.0)]);

    let horizon = 6;
    let plan = plan_finite_horizon(&mdp, horizon).unwrap();
    println!("optimal plan over {horizon} steps:");
    for m in 0..horizon {
        let row: Vec<&str> = (0..mdp.n_states())
            .map(|s| mdp.action_name(s, plan.action(m, s)))
            .collect();
        println!("  step {m}: s1 -> {}, s2 -> {}", row[0], row[1]);
    }
    println!("plan value from s1: {:.4}", plan.value(0, 0));

    let always_stay = StationaryPolicy::new(vec![0, 0]);
    let v = evaluate_policy(&mdp, &always_stay, 0, 1000).unwrap();
    println!("always-stay average over 1000 steps from s1: {v:.4}");

    let (oracle, best) = opt_oracle(&mdp, 1000).unwrap();
    println!("oracle average over 1000 steps: {oracle:.4}");
    println!(
        "oracle stationary policy: s1 -> {}, s2 -> {}",
        mdp.action_name(0, best.action(0)),
        mdp.action_name(1, best.action(1))
    );
}
