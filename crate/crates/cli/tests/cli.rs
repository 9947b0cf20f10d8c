//! End-to-end tests of the `iwo` binary: exit codes, payload contents,
//! and conformance of every emitted envelope to the shipped JSON schema.

use serde_json::Value;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_iwo"))
        .args(args)
        .env_remove("IWO_SEED")
        .env_remove("IWO_SAMPLES")
        .output()
        .expect("binary runs")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn envelope(out: &Output) -> Value {
    let v: Value = serde_json::from_slice(&out.stdout).expect("stdout is a single JSON envelope");
    validate_envelope(&v);
    v
}

// -- minimal JSON-schema checker (the subset the shipped schema uses) --------

fn schema_root() -> Value {
    let text = include_str!("../schema/envelope.schema.json");
    serde_json::from_str(text).expect("schema file parses")
}

fn resolve_ref<'a>(root: &'a Value, reference: &str) -> &'a Value {
    let path = reference
        .strip_prefix("#/")
        .unwrap_or_else(|| panic!("unsupported $ref {reference}"));
    let mut cur = root;
    for part in path.split('/') {
        cur = cur
            .get(part)
            .unwrap_or_else(|| panic!("dangling $ref {reference}"));
    }
    cur
}

fn type_matches(ty: &str, instance: &Value) -> bool {
    match ty {
        "object" => instance.is_object(),
        "array" => instance.is_array(),
        "string" => instance.is_string(),
        "boolean" => instance.is_boolean(),
        "null" => instance.is_null(),
        "number" => instance.is_number(),
        "integer" => instance.is_i64() || instance.is_u64(),
        other => panic!("unsupported type keyword {other}"),
    }
}

fn check(schema: &Value, root: &Value, instance: &Value, path: &str, errors: &mut Vec<String>) {
    if let Some(reference) = schema.get("$ref").and_then(Value::as_str) {
        return check(resolve_ref(root, reference), root, instance, path, errors);
    }
    if let Some(expected) = schema.get("const") {
        if expected != instance {
            errors.push(format!("{path}: expected const {expected}, got {instance}"));
        }
    }
    if let Some(options) = schema.get("enum").and_then(Value::as_array) {
        if !options.contains(instance) {
            errors.push(format!("{path}: {instance} not in {options:?}"));
        }
    }
    if let Some(ty) = schema.get("type") {
        let ok = match ty {
            Value::String(t) => type_matches(t, instance),
            Value::Array(ts) => ts
                .iter()
                .any(|t| type_matches(t.as_str().expect("type name"), instance)),
            _ => panic!("bad type clause"),
        };
        if !ok {
            errors.push(format!("{path}: type mismatch (want {ty}, got {instance})"));
            return;
        }
    }
    if let Some(branches) = schema.get("oneOf").and_then(Value::as_array) {
        let hits = branches
            .iter()
            .filter(|b| {
                let mut sub = Vec::new();
                check(b, root, instance, path, &mut sub);
                sub.is_empty()
            })
            .count();
        if hits != 1 {
            errors.push(format!("{path}: {hits} oneOf branches match"));
        }
    }
    if let Some(min) = schema.get("minimum").and_then(Value::as_f64) {
        if !instance.is_null() {
            if let Some(v) = instance.as_f64() {
                if v < min {
                    errors.push(format!("{path}: {v} below minimum {min}"));
                }
            }
        }
    }
    if let Some(obj) = instance.as_object() {
        if let Some(required) = schema.get("required").and_then(Value::as_array) {
            for key in required {
                let key = key.as_str().unwrap();
                if !obj.contains_key(key) {
                    errors.push(format!("{path}: missing required key {key}"));
                }
            }
        }
        if let Some(props) = schema.get("properties").and_then(Value::as_object) {
            for (key, sub) in props {
                if let Some(child) = obj.get(key) {
                    check(sub, root, child, &format!("{path}.{key}"), errors);
                }
            }
        }
    }
    if let Some(arr) = instance.as_array() {
        if let Some(items) = schema.get("items") {
            for (idx, child) in arr.iter().enumerate() {
                check(items, root, child, &format!("{path}[{idx}]"), errors);
            }
        }
    }
}

fn validate_envelope(envelope: &Value) {
    let root = schema_root();
    let mut errors = Vec::new();
    check(&root, &root, envelope, "$", &mut errors);
    // the envelope schema keeps payload generic; the per-command payload
    // shape lives under $defs/<command>Payload
    let command = envelope["command"].as_str().expect("command");
    let payload_schema = resolve_ref(&root, &format!("#/$defs/{command}Payload")).clone();
    check(
        &payload_schema,
        &root,
        &envelope["payload"],
        "$.payload",
        &mut errors,
    );
    assert!(errors.is_empty(), "schema violations: {errors:#?}");
}

// -- decompose ----------------------------------------------------------------

#[test]
fn decompose_reports_dimensions() {
    let out = run(&["decompose", "3", "2"]);
    assert_eq!(exit_code(&out), 0);
    let v = envelope(&out);
    let dims = &v["payload"]["dims"];
    assert_eq!(dims["so"], 10);
    assert_eq!(dims["k"], 4);
    assert_eq!(dims["p"], 6);
    assert_eq!(dims["a"], 2);
    assert_eq!(dims["k0"], 0);
    assert_eq!(dims["n"], 4);
}

#[test]
fn decompose_split_signature_has_no_single_roots() {
    let out = run(&["decompose", "2", "2"]);
    assert_eq!(exit_code(&out), 0);
    let v = envelope(&out);
    let roots = v["payload"]["roots"].as_array().unwrap();
    assert_eq!(roots.len(), 4);
    for r in roots {
        let name = r["root"].as_str().unwrap();
        assert!(
            name.contains('+') || name.matches('f').count() == 2,
            "unexpected single root {name} for p = q"
        );
    }
}

#[test]
fn decompose_with_bases_includes_matrices() {
    let out = run(&["decompose", "2", "1", "--bases"]);
    assert_eq!(exit_code(&out), 0);
    let v = envelope(&out);
    let n = v["payload"]["bases"]["n"].as_array().unwrap();
    assert_eq!(n.len(), 1);
    assert_eq!(n[0].as_array().unwrap().len(), 3);
}

#[test]
fn invalid_signature_suggests_swapping() {
    let out = run(&["decompose", "1", "2"]);
    assert_eq!(exit_code(&out), 2);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("swap"), "stderr: {stderr}");
}

// -- orbit ---------------------------------------------------------------------

#[test]
fn orbit_n_at_k1_point() {
    let out = run(&["orbit", "3", "2", "--group", "N", "--point", "0,0,1,0,0"]);
    assert_eq!(exit_code(&out), 0);
    let v = envelope(&out);
    assert_eq!(v["payload"]["oracleDim"], 3);
    assert_eq!(v["payload"]["predictedDim"], 3);
    assert_eq!(v["payload"]["agrees"], true);
    assert_eq!(v["payload"]["stratum"]["kIndex"], 1);
}

#[test]
fn orbit_k0an_on_the_cylinder() {
    let out = run(&[
        "orbit",
        "4",
        "2",
        "--group",
        "K0AN",
        "--point",
        "1,0,0,0,0,0",
    ]);
    assert_eq!(exit_code(&out), 0);
    let v = envelope(&out);
    assert_eq!(v["payload"]["oracleDim"], 3);
    assert_eq!(v["payload"]["predictedDim"], 3);
    assert_eq!(
        v["payload"]["descriptor"]["form"]["kind"],
        "cylinder-product"
    );
}

#[test]
fn orbit_an_on_the_cylinder() {
    let out = run(&["orbit", "3", "2", "--group", "AN", "--point", "1,0,0,0,0"]);
    assert_eq!(exit_code(&out), 0);
    let v = envelope(&out);
    assert_eq!(v["payload"]["oracleDim"], 2);
}

#[test]
fn orbit_with_rational_coordinates_and_kprime() {
    let out = run(&[
        "orbit",
        "5",
        "2",
        "--group",
        "KprimeAN",
        "--kprime",
        "indices:0",
        "--point",
        "1/2,-1/3,0,0,5,0,0",
    ]);
    assert_eq!(exit_code(&out), 0);
    let v = envelope(&out);
    assert_eq!(v["payload"]["group"], "KprimeAN");
    assert_eq!(v["payload"]["agrees"], true);
}

#[test]
fn orbit_rejects_bad_input() {
    // floats are refused on the exact path
    let out = run(&["orbit", "3", "2", "--group", "N", "--point", "0.5,0,0,0,0"]);
    assert_eq!(exit_code(&out), 2);
    // wrong arity
    let out = run(&["orbit", "3", "2", "--group", "N", "--point", "1,2,3"]);
    assert_eq!(exit_code(&out), 2);
    // the zero vector has no orbit report
    let out = run(&["orbit", "3", "2", "--group", "N", "--point", "0,0,0,0,0"]);
    assert_eq!(exit_code(&out), 2);
    // unknown group
    let out = run(&["orbit", "3", "2", "--group", "Q", "--point", "0,0,1,0,0"]);
    assert_eq!(exit_code(&out), 2);
}

// -- verify ---------------------------------------------------------------------

#[test]
fn verify_all_exits_zero() {
    let out = run(&["verify", "3", "2", "--suite", "all", "--seed", "7"]);
    assert_eq!(exit_code(&out), 0);
    let v = envelope(&out);
    assert_eq!(v["payload"]["allPassed"], true);
    let suites = v["payload"]["suites"].as_array().unwrap();
    assert_eq!(suites.len(), 10);
    for s in suites {
        assert_ne!(s["status"], "fail", "suite {} failed", s["suite"]);
    }
}

#[test]
fn verify_reports_max_orbit_dimension() {
    let out = run(&["verify", "5", "3", "--suite", "N-cohomogeneity"]);
    assert_eq!(exit_code(&out), 0);
    let v = envelope(&out);
    let suite = &v["payload"]["suites"][0];
    assert_eq!(suite["details"]["maxOrbitDim"], 6); // p + q - 2
    assert_eq!(suite["details"]["cohomogeneity"], 2);
}

#[test]
fn report_only_suite_never_gates() {
    let out = run(&["verify", "4", "2", "--suite", "A-orbit-count"]);
    assert_eq!(exit_code(&out), 0);
    let v = envelope(&out);
    let suite = &v["payload"]["suites"][0];
    assert_eq!(suite["status"], "report-only");
    assert_eq!(suite["details"]["enumeratedOrbits"], 9);
    assert_eq!(suite["details"]["claimedClosedForm"], 8);
}

#[test]
fn unknown_suite_is_a_usage_error() {
    let out = run(&["verify", "3", "2", "--suite", "bogus"]);
    assert_eq!(exit_code(&out), 2);
}

// -- flow -----------------------------------------------------------------------

#[test]
fn flow_along_a_scales_the_null_ray() {
    let out = run(&[
        "flow", "2", "1", "--gen", "a:1", "--point", "0,1,-1", "--t", "-1:1:11",
    ]);
    assert_eq!(exit_code(&out), 0);
    let v = envelope(&out);
    let samples = v["payload"]["samples"].as_array().unwrap();
    assert_eq!(samples.len(), 11);
    for s in samples {
        let t = s["t"].as_f64().unwrap();
        let p = s["point"].as_array().unwrap();
        let scale = (-t).exp();
        assert!((p[1].as_f64().unwrap() - scale).abs() <= 1e-9);
        assert!((p[2].as_f64().unwrap() + scale).abs() <= 1e-9);
        assert!(s["normResidual"].as_f64().unwrap() <= 1e-9);
    }
}

#[test]
fn flow_fixes_the_degenerate_direction() {
    let out = run(&[
        "flow",
        "3",
        "2",
        "--gen",
        "n:0",
        "--point",
        "0,0,1,-1,0",
        "--t",
        "-2:2:9",
    ]);
    assert_eq!(exit_code(&out), 0);
    let v = envelope(&out);
    for s in v["payload"]["samples"].as_array().unwrap() {
        let p = s["point"].as_array().unwrap();
        let expected = [0.0, 0.0, 1.0, -1.0, 0.0];
        for (a, b) in p.iter().zip(expected) {
            assert!((a.as_f64().unwrap() - b).abs() <= 1e-10);
        }
    }
}

#[test]
fn flow_single_step_returns_the_input() {
    let out = run(&[
        "flow", "2", "1", "--gen", "a:1", "--point", "3,2,1", "--t", "0:0:1",
    ]);
    assert_eq!(exit_code(&out), 0);
    let v = envelope(&out);
    let samples = v["payload"]["samples"].as_array().unwrap();
    assert_eq!(samples.len(), 1);
    assert_eq!(samples[0]["t"], 0.0);
    let p = samples[0]["point"].as_array().unwrap();
    assert_eq!(p[0], 3.0);
    assert_eq!(p[1], 2.0);
    assert_eq!(p[2], 1.0);
}

#[test]
fn flow_csv_format() {
    let out = run(&[
        "flow", "2", "1", "--gen", "a:1", "--point", "0,1,-1", "--t", "0:1:3", "--format", "csv",
    ]);
    assert_eq!(exit_code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,x1,x2,x3,residual"));
    assert_eq!(lines.clone().count(), 3);
    for line in lines {
        assert_eq!(line.split(',').count(), 5);
        assert!(!line.contains(' '));
    }
    assert!(!text.contains('\r'), "CSV uses LF line endings");
}

#[test]
fn flow_rejects_malformed_specs() {
    let out = run(&["flow", "2", "1", "--gen", "b:0", "--point", "0,1,-1"]);
    assert_eq!(exit_code(&out), 2);
    let out = run(&["flow", "2", "1", "--gen", "n:7", "--point", "0,1,-1"]);
    assert_eq!(exit_code(&out), 2);
    let out = run(&[
        "flow", "2", "1", "--gen", "a:1", "--point", "0,1,-1", "--t", "0:1",
    ]);
    assert_eq!(exit_code(&out), 2);
}

// -- sample ----------------------------------------------------------------------

#[test]
fn sample_covers_every_stratum() {
    let out = run(&["sample", "3", "2", "--samples", "2"]);
    assert_eq!(exit_code(&out), 0);
    let v = envelope(&out);
    let tags: Vec<&str> = v["payload"]["points"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p["stratumTag"].as_str().unwrap())
        .collect();
    for expected in ["a(k=1)", "a(k=2)", "b", "c(l=1)", "c(l=2)"] {
        assert!(tags.contains(&expected), "missing stratum {expected}");
    }
}

#[test]
fn sample_records_empty_strata() {
    let out = run(&["sample", "2", "2", "--samples", "1"]);
    assert_eq!(exit_code(&out), 0);
    let v = envelope(&out);
    assert_eq!(v["payload"]["skipped"].as_array().unwrap().len(), 1);
}

// -- configuration precedence ------------------------------------------------------

#[test]
fn seed_comes_from_flag_then_env_then_default() {
    let from_env = Command::new(env!("CARGO_BIN_EXE_iwo"))
        .args(["sample", "2", "1", "--samples", "1"])
        .env("IWO_SEED", "5")
        .output()
        .unwrap();
    let v: Value = serde_json::from_slice(&from_env.stdout).unwrap();
    assert_eq!(v["payload"]["plan"]["seed"], 5);

    let flag_wins = Command::new(env!("CARGO_BIN_EXE_iwo"))
        .args(["sample", "2", "1", "--samples", "1", "--seed", "9"])
        .env("IWO_SEED", "5")
        .output()
        .unwrap();
    let v: Value = serde_json::from_slice(&flag_wins.stdout).unwrap();
    assert_eq!(v["payload"]["plan"]["seed"], 9);

    let default = run(&["sample", "2", "1", "--samples", "1"]);
    let v: Value = serde_json::from_slice(&default.stdout).unwrap();
    assert_eq!(v["payload"]["plan"]["seed"], 0);
}

#[test]
fn samples_env_is_honored() {
    let out = Command::new(env!("CARGO_BIN_EXE_iwo"))
        .args(["sample", "2", "1"])
        .env("IWO_SAMPLES", "3")
        .env_remove("IWO_SEED")
        .output()
        .unwrap();
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["payload"]["plan"]["perStratum"], 3);
}

#[test]
fn deterministic_under_fixed_seed() {
    let a = run(&["sample", "3", "2", "--samples", "4", "--seed", "11"]);
    let b = run(&["sample", "3", "2", "--samples", "4", "--seed", "11"]);
    let ja: Value = serde_json::from_slice(&a.stdout).unwrap();
    let jb: Value = serde_json::from_slice(&b.stdout).unwrap();
    assert_eq!(ja["payload"], jb["payload"]);
}
