//! The JSON files under `fixtures/` must match the in-code builders.
//! Regenerate them with `SIGHTLINE_BLESS=1 cargo test --test fixture_files`.

use std::path::PathBuf;

use serde_json::Value;
use sightline_core::api::{validate, ValidateRequest};
use sightline_core::user_model::UserModelFile;
use sightline_core::{fixtures, DecisionModel, Scenario};

fn dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn blessing() -> bool {
    std::env::var_os("SIGHTLINE_BLESS").is_some()
}

fn check(name: &str, expected: &Value) {
    let path = dir().join(name);
    if blessing() {
        std::fs::create_dir_all(dir()).unwrap();
        std::fs::write(&path, serde_json::to_string_pretty(expected).unwrap() + "\n").unwrap();
        return;
    }
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let actual: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(&actual, expected, "{name} is stale; rerun with SIGHTLINE_BLESS=1");
}

fn models() -> Vec<(&'static str, DecisionModel)> {
    vec![
        ("mini.model.json", fixtures::mini_model()),
        ("mini_t.model.json", fixtures::mini_t_model()),
        ("mini_weak.model.json", fixtures::mini_weak_model()),
        ("oms.model.json", fixtures::oms_model()),
    ]
}

fn scenarios() -> Vec<(&'static str, &'static str, Scenario)> {
    vec![
        ("mini.scenario.json", "mini.model.json", fixtures::mini_scenario()),
        ("mini_t_leak.scenario.json", "mini_t.model.json", fixtures::mini_t_leak_scenario(2)),
        ("mini_t_nominal.scenario.json", "mini_t.model.json", fixtures::mini_t_nominal_scenario()),
        ("oms.scenario.json", "oms.model.json", fixtures::oms_scenario()),
    ]
}

#[test]
fn model_files_match_builders() {
    for (name, model) in models() {
        check(name, &serde_json::to_value(&model).unwrap());
        if !blessing() {
            let loaded = DecisionModel::load(dir().join(name)).unwrap();
            assert_eq!(serde_json::to_value(&loaded).unwrap(), serde_json::to_value(&model).unwrap());
        }
    }
}

#[test]
fn scenario_files_reference_model_files() {
    for (name, model_file, scenario) in scenarios() {
        let mut v = serde_json::to_value(&scenario).unwrap();
        v["model"] = Value::String(model_file.into());
        check(name, &v);
        if !blessing() {
            let loaded = Scenario::load(dir().join(name)).unwrap();
            assert_eq!(
                serde_json::to_value(&loaded).unwrap(),
                serde_json::to_value(&scenario).unwrap(),
                "{name}"
            );
        }
    }
}

#[test]
fn user_files_build_the_fixture_users() {
    let novice = UserModelFile::load(dir().join("mini_novice.user.json")).unwrap();
    let (gold, user) = novice.build_with_referenced_gold().unwrap();
    assert_eq!(user, fixtures::mini_novice(&gold));

    let trainee = UserModelFile::load(dir().join("oms_trainee.user.json")).unwrap();
    let (gold, user) = trainee.build_with_referenced_gold().unwrap();
    assert_eq!(user, fixtures::oms_trainee(&gold));
}

#[test]
fn broken_model_file_is_invalid() {
    let text = std::fs::read_to_string(dir().join("broken.model.json")).unwrap();
    let resp = validate(&ValidateRequest {
        model: serde_json::from_str(&text).unwrap(),
    })
    .unwrap();
    assert!(!resp.valid);
    assert!(!resp.violations.is_empty());
}
