//! Seeded statistical checks: empirical frequencies from the simulator
//! against their analytic values, with explicit tolerance bands. Every
//! trial uses a fixed seed, so failures reproduce exactly.

use mdpu::{DiscoveryFamily, Edge, Env, EnvAction, MdpSpec, MdpuSpec};

fn fully_aware(mdp: MdpSpec, n: usize) -> MdpuSpec {
    MdpuSpec {
        aware_states: (0..n).collect(),
        aware_actions: (0..n).map(|s| (0..mdp.n_actions(s)).collect()).collect(),
        discovery: DiscoveryFamily::Constant { c: 0.5 },
        explore_found: vec![0.5; n],
        explore_not_found: vec![0.0; n],
        mdp,
    }
}

fn one_state_with_hidden(hidden: usize, family: DiscoveryFamily) -> MdpuSpec {
    let mut mdp = MdpSpec::new();
    let s1 = mdp.add_state("s1");
    mdp.add_action(s1, "known", vec![Edge::new(s1, 1.0, 1.0)]);
    for i in 0..hidden {
        mdp.add_action(s1, &format!("hidden_{i}"), vec![Edge::new(s1, 1.0, 2.0)]);
    }
    MdpuSpec {
        mdp,
        aware_states: vec![0],
        aware_actions: vec![vec![0]],
        discovery: family,
        explore_found: vec![0.5],
        explore_not_found: vec![0.0],
    }
}

#[test]
fn transition_frequencies_match_the_edge_probabilities() {
    let mut mdp = MdpSpec::new();
    let s1 = mdp.add_state("s1");
    let s2 = mdp.add_state("s2");
    let s3 = mdp.add_state("s3");
    mdp.add_action(
        s1,
        "spread",
        vec![
            Edge::new(s1, 0.2, 0.0),
            Edge::new(s2, 0.3, 0.0),
            Edge::new(s3, 0.5, 0.0),
        ],
    );
    mdp.add_action(s2, "back", vec![Edge::new(s1, 1.0, 0.0)]);
    mdp.add_action(s3, "back", vec![Edge::new(s1, 1.0, 0.0)]);
    let spec = fully_aware(mdp, 3);

    let plays = 100_000u64;
    let mut env = Env::new(&spec, 0, 424242).unwrap();
    let mut counts = [0u64; 3];
    for _ in 0..plays {
        let obs = env.step(EnvAction::Act(0));
        counts[obs.next_state] += 1;
        if obs.next_state != 0 {
            env.step(EnvAction::Act(0));
        }
    }
    let bound = 4.0 * ((plays as f64).ln() / plays as f64).sqrt();
    for (i, p) in [0.2f64, 0.3, 0.5].iter().enumerate() {
        let freq = counts[i] as f64 / plays as f64;
        assert!(
            (freq - p).abs() <= bound,
            "outcome {i}: frequency {freq} vs probability {p} (bound {bound})"
        );
    }
}

#[test]
fn revealed_actions_are_uniform_over_the_hidden_set() {
    let spec = one_state_with_hidden(3, DiscoveryFamily::Constant { c: 1.0 });
    let trials = 10_000u64;
    let mut counts = [0u64; 3];
    for seed in 0..trials {
        let mut env = Env::new(&spec, 0, seed).unwrap();
        let obs = env.step(EnvAction::Explore);
        let revealed = obs.discovered.expect("c = 1 discovers on the first play");
        counts[revealed - 1] += 1;
    }
    let three_sigma = 3.0 * ((1.0 / 3.0) * (2.0 / 3.0) / trials as f64).sqrt();
    for (i, c) in counts.iter().enumerate() {
        let freq = *c as f64 / trials as f64;
        assert!(
            (freq - 1.0 / 3.0).abs() <= three_sigma,
            "hidden action {i}: frequency {freq} vs 1/3 (3-sigma {three_sigma})"
        );
    }
}

#[test]
fn nondiscovery_frequency_tracks_the_product() {
    let cases = [
        (DiscoveryFamily::Power { alpha: 2.0 }, 10u64),
        (DiscoveryFamily::Constant { c: 0.5 }, 5),
        (DiscoveryFamily::HarmonicJ, 10),
    ];
    let trials = 10_000u64;
    for (family, t) in cases {
        let expected = family.nondiscovery_product(1, t).value;
        let spec = one_state_with_hidden(1, family.clone());
        let mut misses = 0u64;
        for seed in 0..trials {
            let mut env = Env::new(&spec, 0, seed).unwrap();
            let mut found = false;
            for _ in 0..t {
                if env.step(EnvAction::Explore).discovered.is_some() {
                    found = true;
                    break;
                }
            }
            if !found {
                misses += 1;
            }
        }
        let freq = misses as f64 / trials as f64;
        let three_sigma = 3.0 * (expected * (1.0 - expected) / trials as f64).sqrt();
        assert!(
            (freq - expected).abs() <= three_sigma,
            "{family:?} at t = {t}: frequency {freq} vs product {expected} (3-sigma {three_sigma})"
        );
    }
}

#[test]
fn discovery_rate_at_the_explore_threshold_matches_the_analytic_value() {
    // constant(0.3): the chance of at least one success in 15 plays is
    // 1 - 0.7^15; the sampled rate must sit in its own 3-sigma band, not
    // just above the cruder guarantee floor.
    let spec = one_state_with_hidden(1, DiscoveryFamily::Constant { c: 0.3 });
    let trials = 10_000u64;
    let truth = 1.0 - 0.7f64.powi(15);
    let mut found = 0u64;
    for seed in 0..trials {
        let mut env = Env::new(&spec, 0, seed).unwrap();
        for _ in 0..15 {
            if env.step(EnvAction::Explore).discovered.is_some() {
                found += 1;
                break;
            }
        }
    }
    let freq = found as f64 / trials as f64;
    let three_sigma = 3.0 * (truth * (1.0 - truth) / trials as f64).sqrt();
    assert!(
        (freq - truth).abs() <= three_sigma,
        "frequency {freq} vs analytic {truth} (3-sigma {three_sigma})"
    );
}

#[test]
fn failure_counter_resets_after_each_discovery() {
    // With two hidden actions and a table family that only ever fires on
    // the first play after a reset, the second discovery can still happen:
    // proof that the counter went back to zero.
    let spec = one_state_with_hidden(
        2,
        DiscoveryFamily::Table {
            values: vec![1.0, 0.0],
        },
    );
    let mut env = Env::new(&spec, 0, 7).unwrap();
    let first = env.step(EnvAction::Explore);
    assert!(first.discovered.is_some());
    assert_eq!(env.failures_at(0), 0);
    let second = env.step(EnvAction::Explore);
    assert!(
        second.discovered.is_some(),
        "counter must reset so D is 1.0 again"
    );
    assert!(env.fully_discovered());
}
