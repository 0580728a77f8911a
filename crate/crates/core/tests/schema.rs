//! The published bundle schema names exactly the fields the serializer writes.

use std::collections::BTreeSet;
use std::path::Path;

use ppda_core::dataio::bundle_to_string;
use ppda_core::fixtures::walking_arm_bundle;
use ppda_core::{AxisErrors, SensorHardware};
use serde_json::Value;

fn schema() -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/bundle.schema.json");
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn resolve<'a>(root: &'a Value, node: &'a Value) -> &'a Value {
    match node.get("$ref").and_then(Value::as_str) {
        Some(r) => resolve(root, root.pointer(r.trim_start_matches('#')).unwrap()),
        None => node,
    }
}

/// Walks `doc` alongside `node`, checking object keys against `properties`
/// and `required`.
fn check(root: &Value, node: &Value, doc: &Value, at: &str) {
    let node = resolve(root, node);
    match doc {
        Value::Object(map) => {
            if let Some(props) = node.get("properties").and_then(Value::as_object) {
                let keys: BTreeSet<&str> = map.keys().map(String::as_str).collect();
                let known: BTreeSet<&str> = props.keys().map(String::as_str).collect();
                assert!(keys.is_subset(&known), "{at}: {keys:?} not within {known:?}");
                for req in node["required"].as_array().unwrap() {
                    assert!(keys.contains(req.as_str().unwrap()), "{at}: missing {req}");
                }
                for (k, v) in map {
                    check(root, &props[k], v, &format!("{at}.{k}"));
                }
            } else {
                let inner = &node["additionalProperties"];
                for (k, v) in map {
                    check(root, inner, v, &format!("{at}.{k}"));
                }
            }
        }
        Value::Array(items) => {
            if let Some(n) = node.get("minItems").and_then(Value::as_u64) {
                assert!(items.len() as u64 >= n, "{at}: too short");
            }
            if let Some(n) = node.get("maxItems").and_then(Value::as_u64) {
                assert!(items.len() as u64 <= n, "{at}: too long");
            }
            for (i, v) in items.iter().enumerate() {
                check(root, &node["items"], v, &format!("{at}[{i}]"));
            }
        }
        _ => {}
    }
}

#[test]
fn serialized_bundles_follow_the_published_schema() {
    let root = schema();
    let (mut bundle, labels) = walking_arm_bundle("s09", 50.0, 20, 10);
    bundle
        .hardware
        .set(
            "wrist",
            SensorHardware {
                accel: AxisErrors {
                    sigma: [0.1; 3],
                    bias: [0.0; 3],
                },
                gyro: AxisErrors::default(),
            },
        )
        .unwrap();
    for labels in [Some(&labels[..]), None] {
        let doc: Value = serde_json::from_str(&bundle_to_string(&bundle, labels).unwrap()).unwrap();
        check(&root, &root, &doc, "$");
    }
}
