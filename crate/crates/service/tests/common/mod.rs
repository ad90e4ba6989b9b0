//! Helpers shared by the service integration tests.

#![allow(dead_code)]

use std::path::PathBuf;

use serde_json::Value;

pub fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn read_json(path: PathBuf) -> Value {
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    serde_json::from_str(&text).unwrap()
}

/// Compiles a published schema from `docs/schemas`, resolving its shared definitions.
pub fn validator(name: &str) -> jsonschema::Validator {
    let dir = repo_root().join("docs/schemas");
    let common = read_json(dir.join("common.schema.json"));
    let schema = read_json(dir.join(format!("{name}.schema.json")));
    jsonschema::options()
        .with_resource(
            "json-schema:///common.schema.json",
            jsonschema::Resource::from_contents(common).unwrap(),
        )
        .build(&schema)
        .unwrap_or_else(|e| panic!("schema {name}: {e}"))
}

pub fn assert_valid(name: &str, instance: &Value) {
    let v = validator(name);
    let errors: Vec<String> = v.iter_errors(instance).map(|e| format!("{} at {}", e, e.instance_path)).collect();
    assert!(errors.is_empty(), "{name} schema violations: {errors:#?}\n{instance:#}");
}
