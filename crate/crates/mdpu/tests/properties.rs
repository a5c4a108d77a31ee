//! Randomized invariants, checked with proptest over generated MDPs,
//! discovery families, and declared-knowledge records.

use std::collections::{BTreeMap, BTreeSet};

use mdpu::{
    is_compatible, k0, plan_finite_horizon, DiscoveryFamily, DmKnowledge, Edge, Env, EnvAction,
    MdpSpec, MdpuSpec,
};
use proptest::prelude::*;

fn arb_mdp() -> impl Strategy<Value = MdpSpec> {
    (1usize..=3)
        .prop_flat_map(|n| {
            proptest::collection::vec(
                proptest::collection::vec(
                    proptest::collection::vec((0.05f64..1.0, 0.0f64..5.0), n),
                    1..=3,
                ),
                n,
            )
        })
        .prop_map(|per_state| {
            let mut spec = MdpSpec::new();
            for s in 0..per_state.len() {
                spec.add_state(&format!("s{s}"));
            }
            for (s, actions) in per_state.into_iter().enumerate() {
                for (i, weights) in actions.into_iter().enumerate() {
                    let total: f64 = weights.iter().map(|(w, _)| w).sum();
                    let edges = weights
                        .iter()
                        .enumerate()
                        .map(|(to, (w, r))| Edge::new(to, w / total, *r))
                        .collect();
                    spec.add_action(s, &format!("a{i}"), edges);
                }
            }
            spec
        })
}

fn arb_family() -> impl Strategy<Value = DiscoveryFamily> {
    prop_oneof![
        (0.01f64..=1.0).prop_map(|c| DiscoveryFamily::Constant { c }),
        (0.1f64..3.0).prop_map(|alpha| DiscoveryFamily::Power { alpha }),
        Just(DiscoveryFamily::HarmonicJ),
        (0.1f64..5.0).prop_map(|m1| DiscoveryFamily::LogHarmonic { m1 }),
        proptest::collection::vec(0.0f64..=1.0, 1..6)
            .prop_map(|values| DiscoveryFamily::Table { values }),
    ]
}

proptest! {
    #[test]
    fn remaining_steps_never_hurt_the_plan(mdp in arb_mdp(), horizon in 2usize..=6) {
        let plan = plan_finite_horizon(&mdp, horizon).unwrap();
        for s in 0..mdp.n_states() {
            for t in 0..horizon - 1 {
                prop_assert!(
                    plan.value(t, s) >= plan.value(t + 1, s) - 1e-9,
                    "state {s}: value({t}) = {} < value({}) = {}",
                    plan.value(t, s), t + 1, plan.value(t + 1, s)
                );
            }
            prop_assert!(plan.value(horizon - 1, s) >= 0.0);
        }
    }

    #[test]
    fn longer_plans_contain_shorter_plans_as_suffixes(mdp in arb_mdp(), horizon in 2usize..=6) {
        let long = plan_finite_horizon(&mdp, horizon).unwrap();
        let short = plan_finite_horizon(&mdp, horizon - 1).unwrap();
        for s in 0..mdp.n_states() {
            for t in 1..horizon {
                prop_assert_eq!(long.value(t, s), short.value(t - 1, s));
                prop_assert_eq!(long.action(t, s), short.action(t - 1, s));
            }
        }
    }

    #[test]
    fn partial_sums_grow_and_products_shrink(fam in arb_family(), j in 1u64..=4) {
        let mut last_sum = 0.0f64;
        let mut last_product = 1.0f64;
        for t in 1..=40u64 {
            let p = fam.prob(j, t);
            prop_assert!((0.0..=1.0).contains(&p), "D({j}, {t}) = {p}");
            let sum = fam.partial_sum(j, t);
            prop_assert!(sum >= last_sum - 1e-12, "partial sum fell at t = {t}");
            let product = fam.nondiscovery_product(j, t).value;
            prop_assert!(product <= last_product + 1e-12, "product rose at t = {t}");
            prop_assert!((0.0..=1.0).contains(&product));
            last_sum = sum;
            last_product = product;
        }
    }

    #[test]
    fn discovery_never_slows_with_more_hidden_actions_except_harmonic(
        fam in arb_family(),
        t in 1u64..=50,
    ) {
        if fam == DiscoveryFamily::HarmonicJ {
            return Ok(());
        }
        for j in 1..=6u64 {
            prop_assert!(
                fam.prob(j + 1, t) >= fam.prob(j, t) - 1e-12,
                "{fam:?}: D({}, {t}) < D({j}, {t})", j + 1
            );
        }
    }

    #[test]
    fn compatibility_survives_forgetting_any_declared_fact(
        n in prop_oneof![Just(None), Just(Some(1u64)), Just(Some(2u64))],
        k in prop_oneof![Just(None), Just(Some(2u64)), Just(Some(3u64))],
        rmax in prop_oneof![Just(None), Just(Some(1.5f64)), Just(Some(2.0f64)), Just(Some(3.0f64))],
        states in prop_oneof![Just(vec![]), Just(vec!["s1"]), Just(vec!["s2"])],
        actions in prop_oneof![Just(vec![]), Just(vec!["known"]), Just(vec!["hidden_0"])],
    ) {
        let spec = hidden_arm_spec();
        let full = DmKnowledge {
            aware_states: states.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>(),
            aware_actions: if actions.is_empty() {
                BTreeMap::new()
            } else {
                BTreeMap::from([(
                    "s1".to_string(),
                    actions.iter().map(|a| a.to_string()).collect::<BTreeSet<_>>(),
                )])
            },
            known_n: n,
            known_k: k,
            known_rmax: rmax,
            known_horizon: None,
        };
        if !is_compatible(&spec, &full) {
            return Ok(());
        }
        let weakenings = [
            DmKnowledge { known_n: None, ..full.clone() },
            DmKnowledge { known_k: None, ..full.clone() },
            DmKnowledge { known_rmax: None, ..full.clone() },
            DmKnowledge { aware_states: BTreeSet::new(), ..full.clone() },
            DmKnowledge { aware_actions: BTreeMap::new(), ..full.clone() },
        ];
        for weaker in weakenings {
            prop_assert!(
                is_compatible(&spec, &weaker),
                "spec compatible with {full:?} but not with weaker {weaker:?}"
            );
        }
    }

    #[test]
    fn explore_budget_is_the_minimal_crossing(
        fam in arb_family(),
        n in 1u64..=5,
        delta in 0.02f64..0.5,
    ) {
        let Ok(bound) = k0(&fam, n, delta) else { return Ok(()) };
        let Some(m) = bound.as_finite() else { return Ok(()) };
        if m > 200_000 {
            return Ok(());
        }
        let target = (4.0 * n as f64 / delta).ln();
        prop_assert!(
            fam.partial_sum(1, m) >= target - 1e-9,
            "partial sum at K0 = {m} misses target {target}"
        );
        if m > 1 {
            prop_assert!(
                fam.partial_sum(1, m - 1) < target + 1e-9,
                "K0 = {m} is not minimal for target {target}"
            );
        }
    }

    #[test]
    fn restored_snapshots_replay_identical_futures(
        seed in 0u64..10_000,
        prefix in 0usize..20,
        script in proptest::collection::vec(any::<bool>(), 10),
    ) {
        let spec = hidden_arm_spec();
        let mut env = Env::new(&spec, 0, seed).unwrap();
        for i in 0..prefix {
            let act = if i % 3 == 0 { EnvAction::Explore } else { EnvAction::Act(0) };
            env.step(act);
        }
        let snap = env.snapshot();
        let acts: Vec<EnvAction> = script
            .iter()
            .map(|&explore| if explore { EnvAction::Explore } else { EnvAction::Act(0) })
            .collect();
        let first: Vec<_> = acts.iter().map(|&a| env.step(a)).collect();
        let mut replayed = Env::restore(&spec, snap);
        let second: Vec<_> = acts.iter().map(|&a| replayed.step(a)).collect();
        prop_assert_eq!(first, second);
    }
}

fn hidden_arm_spec() -> MdpuSpec {
    let mut mdp = MdpSpec::new();
    let s1 = mdp.add_state("s1");
    mdp.add_action(s1, "known", vec![Edge::new(s1, 1.0, 1.0)]);
    mdp.add_action(s1, "hidden_0", vec![Edge::new(s1, 1.0, 2.0)]);
    MdpuSpec {
        mdp,
        aware_states: vec![0],
        aware_actions: vec![vec![0]],
        discovery: DiscoveryFamily::Constant { c: 0.5 },
        explore_found: vec![0.5],
        explore_not_found: vec![0.0],
    }
}
