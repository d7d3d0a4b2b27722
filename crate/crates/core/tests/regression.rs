//! Frozen oracle output for a seed-fixed `n = 7`, `k = 5`, `c = 2.5`
//! instance. Set `MIXMRF_BLESS=1` to rewrite the fixture.

use std::path::PathBuf;

use serde_json::{json, Value};

use mixmrf::exact::{enumerate_exact, mass_buckets, DEFAULT_CAP};
use mixmrf::generate::{generate, GenSpec};

const SEED: u64 = 2025;

fn fixture() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/buckets_n7_k5_c2.5.json")
}

fn current() -> Value {
    let inst = generate(&GenSpec::complete(7, 5, 2.5, SEED)).unwrap();
    let exact = enumerate_exact(&inst, DEFAULT_CAP).unwrap();
    let buckets: Vec<Value> = mass_buckets(&inst, 20, DEFAULT_CAP)
        .unwrap()
        .iter()
        .map(|b| json!({"lo": b.lo, "hi": b.hi, "mass": b.mass}))
        .collect();
    json!({
        "seed": SEED,
        "log_z": exact.log_z,
        "mode": exact.mode_config.one_based(),
        "mode_value": exact.mode_value,
        "buckets": buckets,
    })
}

fn close(a: &Value, b: &Value, key: &str) -> bool {
    (a[key].as_f64().unwrap() - b[key].as_f64().unwrap()).abs() <= 1e-12 * a[key].as_f64().unwrap().abs().max(1.0)
}

#[test]
fn bucket_profile_is_frozen() {
    let now = current();
    if std::env::var_os("MIXMRF_BLESS").is_some() {
        std::fs::write(fixture(), serde_json::to_string_pretty(&now).unwrap() + "\n").unwrap();
    }
    let frozen: Value = serde_json::from_str(&std::fs::read_to_string(fixture()).unwrap()).unwrap();

    assert_eq!(now["mode"], frozen["mode"]);
    assert!(close(&now, &frozen, "log_z"));
    assert!(close(&now, &frozen, "mode_value"));
    let (a, b) = (now["buckets"].as_array().unwrap(), frozen["buckets"].as_array().unwrap());
    assert_eq!(a.len(), 20);
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(b) {
        for key in ["lo", "hi", "mass"] {
            assert!(close(x, y, key), "{key}: {x} vs {y}");
        }
    }
    let total: f64 = a.iter().map(|x| x["mass"].as_f64().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-12);
}
