//! Scenario files: the on-disk JSON description of an MDPU plus the
//! decision maker's declared knowledge. The schema is strict — unknown
//! fields are rejected, every name must resolve, and the scenario must
//! survive full validation before a caller sees it.

use crate::discovery::DiscoveryFamily;
use crate::mdp::{Edge, MdpSpec, ValidationReport};
use crate::model::{is_compatible, validate_mdpu, DmKnowledge, MdpuSpec};
use serde::Deserialize;
use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use thiserror::Error;

/// A loaded, validated scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub spec: MdpuSpec,
    pub knowledge: DmKnowledge,
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    /// Malformed JSON or a schema violation; the message carries
    /// line/column and the offending field.
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("{path}: invalid scenario\n{report}")]
    Invalid {
        path: String,
        report: ValidationReport,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    name: String,
    states: Vec<String>,
    actions: BTreeMap<String, Vec<String>>,
    aware_states: Vec<String>,
    aware_actions: BTreeMap<String, Vec<String>>,
    transitions: Vec<TransitionJson>,
    explore_found: BTreeMap<String, f64>,
    explore_not_found: BTreeMap<String, f64>,
    discovery: DiscoveryJson,
    knowledge: KnowledgeJson,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TransitionJson {
    from: String,
    action: String,
    to: String,
    prob: f64,
    reward: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DiscoveryJson {
    family: String,
    #[serde(default)]
    c: Option<f64>,
    #[serde(default)]
    alpha: Option<f64>,
    #[serde(default)]
    m1: Option<f64>,
    #[serde(default)]
    values: Option<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct KnowledgeJson {
    #[serde(rename = "N", default)]
    n: Option<u64>,
    #[serde(default)]
    k: Option<u64>,
    #[serde(default)]
    rmax: Option<f64>,
    #[serde(rename = "T", default)]
    t: Option<u64>,
}

impl DiscoveryJson {
    fn resolve(&self, report: &mut ValidationReport) -> Option<DiscoveryFamily> {
        let mut used: Vec<&str> = Vec::new();
        let fam = match self.family.as_str() {
            "constant" => {
                used.push("c");
                self.c.map(|c| DiscoveryFamily::Constant { c }).or_else(|| {
                    report.error("discovery: family constant requires parameter c".into());
                    None
                })
            }
            "power" => {
                used.push("alpha");
                self.alpha
                    .map(|alpha| DiscoveryFamily::Power { alpha })
                    .or_else(|| {
                        report.error("discovery: family power requires parameter alpha".into());
                        None
                    })
            }
            "harmonic_j" => Some(DiscoveryFamily::HarmonicJ),
            "log_harmonic" => {
                used.push("m1");
                self.m1
                    .map(|m1| DiscoveryFamily::LogHarmonic { m1 })
                    .or_else(|| {
                        report.error("discovery: family log_harmonic requires parameter m1".into());
                        None
                    })
            }
            "table" => {
                used.push("values");
                self.values
                    .clone()
                    .map(|values| DiscoveryFamily::Table { values })
                    .or_else(|| {
                        report.error("discovery: family table requires parameter values".into());
                        None
                    })
            }
            other => {
                report.error(format!(
                    "discovery: unknown family {other:?} (expected constant, power, \
                     harmonic_j, log_harmonic, or table)"
                ));
                None
            }
        };
        for (param, present) in [
            ("c", self.c.is_some()),
            ("alpha", self.alpha.is_some()),
            ("m1", self.m1.is_some()),
            ("values", self.values.is_some()),
        ] {
            if present && !used.contains(&param) {
                report.error(format!(
                    "discovery: parameter {param} is not used by family {}",
                    self.family
                ));
            }
        }
        fam
    }
}

/// Parse and validate scenario text. `origin` labels error messages; use
/// the file path.
pub fn parse_scenario(text: &str, origin: &str) -> Result<Scenario, ScenarioError> {
    let file: ScenarioFile = serde_json::from_str(text).map_err(|e| ScenarioError::Parse {
        path: origin.to_string(),
        message: e.to_string(),
    })?;
    let mut report = ValidationReport::default();

    let mut mdp = MdpSpec::new();
    let mut state_index: BTreeMap<&str, usize> = BTreeMap::new();
    for name in &file.states {
        if state_index.contains_key(name.as_str()) {
            report.error(format!("states: duplicate state name {name:?}"));
            continue;
        }
        let idx = mdp.add_state(name);
        state_index.insert(name.as_str(), idx);
    }

    for key in file.actions.keys() {
        if !state_index.contains_key(key.as_str()) {
            report.error(format!("actions: unknown state {key:?}"));
        }
    }

    // Collect each action's edges from the flat transition list before
    // constructing, preserving declaration order of both.
    let mut edge_lists: BTreeMap<(usize, &str), Vec<Edge>> = BTreeMap::new();
    for t in &file.transitions {
        let Some(&from) = state_index.get(t.from.as_str()) else {
            report.error(format!("transitions: unknown state {:?}", t.from));
            continue;
        };
        let Some(&to) = state_index.get(t.to.as_str()) else {
            report.error(format!("transitions: unknown state {:?}", t.to));
            continue;
        };
        let declared = file.actions.get(t.from.as_str());
        if !declared.is_some_and(|names| names.iter().any(|n| n == &t.action)) {
            report.error(format!(
                "transitions: action {:?} is not declared for state {:?}",
                t.action, t.from
            ));
            continue;
        }
        edge_lists
            .entry((from, t.action.as_str()))
            .or_default()
            .push(Edge::new(to, t.prob, t.reward));
    }

    for (name, &s) in &state_index {
        let Some(action_names) = file.actions.get(*name) else {
            report.error(format!("actions: state {name:?} has no action list"));
            continue;
        };
        let mut seen = BTreeSet::new();
        for action in action_names {
            if !seen.insert(action.as_str()) {
                report.error(format!("actions: state {name:?} lists {action:?} twice"));
                continue;
            }
            let edges = edge_lists.remove(&(s, action.as_str())).unwrap_or_default();
            mdp.add_action(s, action, edges);
        }
    }

    let mut aware_states = Vec::new();
    for name in &file.aware_states {
        match state_index.get(name.as_str()) {
            Some(&s) => aware_states.push(s),
            None => report.error(format!("aware_states: unknown state {name:?}")),
        }
    }
    aware_states.sort_unstable();
    aware_states.dedup();

    let mut aware_actions = vec![Vec::new(); mdp.n_states()];
    for (state, actions) in &file.aware_actions {
        let Some(&s) = state_index.get(state.as_str()) else {
            report.error(format!("aware_actions: unknown state {state:?}"));
            continue;
        };
        if !aware_states.contains(&s) {
            report.error(format!(
                "aware_actions: state {state:?} is not in aware_states"
            ));
            continue;
        }
        for action in actions {
            match mdp.action_index(s, action) {
                Some(a) => aware_actions[s].push(a),
                None => report.error(format!(
                    "aware_actions: state {state:?} has no action {action:?}"
                )),
            }
        }
        aware_actions[s].sort_unstable();
        aware_actions[s].dedup();
    }
    for &s in &aware_states {
        if !file.aware_actions.contains_key(mdp.state_name(s)) {
            report.error(format!(
                "aware_actions: missing entry for aware state {:?}",
                mdp.state_name(s)
            ));
        }
    }

    let mut resolve_rewards = |label: &str, map: &BTreeMap<String, f64>| -> Vec<f64> {
        let mut out = vec![0.0; mdp.n_states()];
        for key in map.keys() {
            if !state_index.contains_key(key.as_str()) {
                report.error(format!("{label}: unknown state {key:?}"));
            }
        }
        for (name, &s) in &state_index {
            match map.get(*name) {
                Some(&r) => out[s] = r,
                None => report.error(format!("{label}: missing entry for state {name:?}")),
            }
        }
        out
    };
    let explore_found = resolve_rewards("explore_found", &file.explore_found);
    let explore_not_found = resolve_rewards("explore_not_found", &file.explore_not_found);

    let discovery = file.discovery.resolve(&mut report);

    if !report.is_valid() {
        return Err(ScenarioError::Invalid {
            path: origin.to_string(),
            report,
        });
    }
    let spec = MdpuSpec {
        mdp,
        aware_states,
        aware_actions,
        discovery: discovery.expect("errors already reported"),
        explore_found,
        explore_not_found,
    };

    let mut knowledge = DmKnowledge::from_spec(&spec);
    knowledge.known_n = file.knowledge.n;
    knowledge.known_k = file.knowledge.k;
    knowledge.known_rmax = file.knowledge.rmax;
    knowledge.known_horizon = file.knowledge.t;

    let mut report = validate_mdpu(&spec, knowledge.known_rmax);
    if report.is_valid() && !is_compatible(&spec, &knowledge) {
        report.error("knowledge: declared bounds contradict the scenario's own world".to_string());
    }
    if let Some(t) = file.knowledge.t {
        if t == 0 {
            report.error("knowledge: T must be at least 1".to_string());
        }
    }
    if !report.is_valid() {
        return Err(ScenarioError::Invalid {
            path: origin.to_string(),
            report,
        });
    }

    Ok(Scenario {
        name: file.name,
        spec,
        knowledge,
    })
}

/// Read and parse a scenario file.
pub fn load_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    parse_scenario(&text, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> serde_json::Value {
        serde_json::json!({
            "name": "minimal",
            "states": ["s1"],
            "actions": {"s1": ["a1", "a2"]},
            "aware_states": ["s1"],
            "aware_actions": {"s1": ["a1"]},
            "transitions": [
                {"from": "s1", "action": "a1", "to": "s1", "prob": 1.0, "reward": 1.0},
                {"from": "s1", "action": "a2", "to": "s1", "prob": 1.0, "reward": 2.0}
            ],
            "explore_found": {"s1": 0.5},
            "explore_not_found": {"s1": 0.0},
            "discovery": {"family": "power", "alpha": 2.0},
            "knowledge": {}
        })
    }

    fn parse_value(v: serde_json::Value) -> Result<Scenario, ScenarioError> {
        parse_scenario(&v.to_string(), "test.json")
    }

    #[test]
    fn minimal_scenario_loads() {
        let s = parse_value(minimal()).unwrap();
        assert_eq!(s.name, "minimal");
        assert_eq!(s.spec.mdp.n_states(), 1);
        assert_eq!(s.spec.aware_actions[0], vec![0]);
        assert_eq!(s.spec.hidden_at(0), vec![1]);
        assert_eq!(s.spec.discovery, DiscoveryFamily::Power { alpha: 2.0 });
        assert_eq!(s.knowledge.known_n, None);
        assert!(s.knowledge.aware_states.contains("s1"));
    }

    #[test]
    fn knowledge_fields_carry_through() {
        let mut v = minimal();
        v["knowledge"] = serde_json::json!({"N": 1, "k": 2, "rmax": 2.5, "T": 3});
        let s = parse_value(v).unwrap();
        assert_eq!(s.knowledge.known_n, Some(1));
        assert_eq!(s.knowledge.known_k, Some(2));
        assert_eq!(s.knowledge.known_rmax, Some(2.5));
        assert_eq!(s.knowledge.known_horizon, Some(3));
    }

    #[test]
    fn unknown_top_level_field_is_rejected_by_name() {
        let mut v = minimal();
        v["foo"] = serde_json::json!(1);
        let err = parse_value(v).unwrap_err();
        assert!(err.to_string().contains("foo"), "{err}");
    }

    #[test]
    fn missing_required_field_is_rejected_by_name() {
        let mut v = minimal();
        v.as_object_mut().unwrap().remove("knowledge");
        let err = parse_value(v).unwrap_err();
        assert!(err.to_string().contains("knowledge"), "{err}");
    }

    #[test]
    fn malformed_json_reports_line_and_column() {
        let err = parse_scenario("{\n  \"name\": oops", "bad.json").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 2"), "{msg}");
        assert!(msg.contains("column"), "{msg}");
    }

    #[test]
    fn probability_mass_violation_names_the_pair() {
        let mut v = minimal();
        v["transitions"][0]["prob"] = serde_json::json!(0.99);
        let err = parse_value(v).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("(s1, a1)"), "{msg}");
        assert!(msg.contains("0.99"), "{msg}");
    }

    #[test]
    fn transition_with_unknown_state_is_rejected() {
        let mut v = minimal();
        v["transitions"][0]["to"] = serde_json::json!("s9");
        let err = parse_value(v).unwrap_err();
        assert!(err.to_string().contains("s9"), "{err}");
    }

    #[test]
    fn transition_with_undeclared_action_is_rejected() {
        let mut v = minimal();
        v["transitions"][0]["action"] = serde_json::json!("zz");
        let err = parse_value(v).unwrap_err();
        assert!(err.to_string().contains("zz"), "{err}");
    }

    #[test]
    fn aware_action_must_exist() {
        let mut v = minimal();
        v["aware_actions"]["s1"] = serde_json::json!(["a9"]);
        let err = parse_value(v).unwrap_err();
        assert!(err.to_string().contains("a9"), "{err}");
    }

    #[test]
    fn aware_state_needs_an_aware_actions_entry() {
        let mut v = minimal();
        v["aware_actions"] = serde_json::json!({});
        let err = parse_value(v).unwrap_err();
        assert!(err.to_string().contains("missing entry"), "{err}");
    }

    #[test]
    fn discovery_parameter_mismatches_are_rejected() {
        let mut v = minimal();
        v["discovery"] = serde_json::json!({"family": "constant"});
        assert!(parse_value(v)
            .unwrap_err()
            .to_string()
            .contains("requires parameter c"));
        let mut v = minimal();
        v["discovery"] = serde_json::json!({"family": "constant", "c": 0.5, "alpha": 2.0});
        assert!(parse_value(v).unwrap_err().to_string().contains("not used"));
        let mut v = minimal();
        v["discovery"] = serde_json::json!({"family": "weird"});
        assert!(parse_value(v).unwrap_err().to_string().contains("weird"));
        let mut v = minimal();
        v["discovery"] = serde_json::json!({"family": "harmonic_j"});
        assert!(parse_value(v).is_ok());
    }

    #[test]
    fn explore_reward_map_must_cover_all_states() {
        let mut v = minimal();
        v["explore_found"] = serde_json::json!({});
        let err = parse_value(v).unwrap_err();
        assert!(err.to_string().contains("explore_found"), "{err}");
    }

    #[test]
    fn false_declared_knowledge_is_rejected() {
        let mut v = minimal();
        v["knowledge"] = serde_json::json!({"rmax": 1.5});
        // True max reward is 2; explore_found 0.5 < 1.5, so only the
        // compatibility check can catch this.
        let err = parse_value(v).unwrap_err();
        assert!(err.to_string().contains("contradict"), "{err}");
        let mut v = minimal();
        v["knowledge"] = serde_json::json!({"N": 2});
        assert!(parse_value(v).is_err());
    }

    #[test]
    fn zero_horizon_knowledge_is_rejected() {
        let mut v = minimal();
        v["knowledge"] = serde_json::json!({"T": 0});
        assert!(parse_value(v).is_err());
    }

    #[test]
    fn action_without_transitions_fails_mass_check() {
        let mut v = minimal();
        v["transitions"].as_array_mut().unwrap().pop();
        let err = parse_value(v).unwrap_err();
        assert!(err.to_string().contains("(s1, a2)"), "{err}");
    }

    #[test]
    fn load_scenario_reports_missing_file() {
        let err = load_scenario(Path::new("/nonexistent/nope.json")).unwrap_err();
        assert!(matches!(err, ScenarioError::Io { .. }));
    }
}
