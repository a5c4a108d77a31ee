//! Load every shipped scenario, show what the decision maker starts out
//! knowing, and demonstrate how strict the parser is about mistakes.

use mdpu::{load_scenario, parse_scenario};

fn main() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios");
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    paths.sort();

    for path in &paths {
        let s = load_scenario(path).unwrap();
        let hidden: usize = (0..s.spec.n_states())
            .map(|st| s.spec.hidden_at(st).len())
            .sum();
        let declared = [
            s.knowledge.known_n.map(|v| format!("N = {v}")),
            s.knowledge.known_k.map(|v| format!("k = {v}")),
            s.knowledge.known_rmax.map(|v| format!("Rmax = {v}")),
            s.knowledge.known_horizon.map(|v| format!("T = {v}")),
        ]
        .into_iter()
        .flatten()
        .collect::<Vec<_>>();
        println!(
            "{}: {} states, {} hidden actions, discovery {:?}, declared {{{}}}",
            s.name,
            s.spec.n_states(),
            hidden,
            s.spec.discovery,
            declared.join(", ")
        );
    }

    println!();
    println!("the parser rejects anything it does not understand:");
    let broken = [
        (r#"{"name": 1}"#, "wrong type"),
        (
            r#"{"name": "x", "states": ["s1"], "actions": {"s1": ["a"]}, "aware_states": ["s1"],
               "aware_actions": {"s1": ["a"]}, "transitions": [
                 {"from": "s1", "action": "a", "to": "s1", "prob": 0.99, "reward": 1.0}],
               "explore_found": {"s1": 0.5}, "explore_not_found": {"s1": 0.0},
               "discovery": {"family": "constant", "c": 0.5}, "knowledge": {}, "foo": true}"#,
            "unknown field",
        ),
        (
            r#"{"name": "x", "states": ["s1"], "actions": {"s1": ["a"]}, "aware_states": ["s1"],
               "aware_actions": {"s1": ["a"]}, "transitions": [
                 {"from": "s1", "action": "a", "to": "s1", "prob": 0.99, "reward": 1.0}],
               "explore_found": {"s1": 0.5}, "explore_not_found": {"s1": 0.0},
               "discovery": {"family": "constant", "c": 0.5}, "knowledge": {}}"#,
            "probabilities not summing to 1",
        ),
    ];
    for (text, what) in broken {
        let err = parse_scenario(text, "inline.json").unwrap_err();
        let first = err
            .to_string()
            .lines()
            .take(2)
            .collect::<Vec<_>>()
            .join(" / ");
        println!("  {what}: {first}");
    }
}
