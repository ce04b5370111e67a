use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use descforge_cli::report::EvalReport;
use serde_json::Value;
use tempfile::TempDir;

fn schema(name: &str) -> jsonschema::Validator {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../schemas")
        .join(name);
    let text = fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    jsonschema::validator_for(&serde_json::from_str(&text).unwrap()).expect("schema compiles")
}

fn assert_valid(v: &jsonschema::Validator, doc: &Value, what: &str) {
    let errors: Vec<String> = v
        .iter_errors(doc)
        .map(|e| format!("{} at {}", e, e.instance_path()))
        .collect();
    assert!(errors.is_empty(), "{what}: {errors:#?}");
}

fn load(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

fn descforge(args: &[&str]) {
    let out = Command::new(env!("CARGO_BIN_EXE_descforge"))
        .env_remove("DESCFORGE_SEED")
        .args(args)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn emitted_documents_match_schemas() {
    let report_schema = schema("eval_report.schema.json");
    let selection_schema = schema("selection_result.schema.json");
    let dir = TempDir::new().unwrap();
    let data = dir.path().join("ref.csv");
    let data = data.to_str().unwrap();
    descforge(&["synth", data]);

    for (method, extra) in [
        ("strs", ["--runs", "20"]),
        ("mcuve", ["--iterations", "50"]),
    ] {
        let out = dir.path().join(method);
        let mut args = vec![
            "select",
            data,
            "--method",
            method,
            "--out-dir",
            out.to_str().unwrap(),
        ];
        args.extend(extra);
        descforge(&args);
        assert_valid(&report_schema, &load(&out.join("report.json")), method);
        assert_valid(
            &selection_schema,
            &load(&out.join("selection.json")),
            method,
        );
    }
    let full = dir.path().join("full");
    descforge(&["evaluate", data, "--out-dir", full.to_str().unwrap()]);
    assert_valid(&report_schema, &load(&full.join("report.json")), "pls");
}

#[test]
fn schema_rejects_malformed_reports() {
    let v = schema("eval_report.schema.json");
    let mut doc =
        serde_json::to_value(published("strs", 729, 29, 15, 0.2635, 0.1676, 0.8758)).unwrap();
    assert_valid(&v, &doc, "published");
    doc["rmsep"] = Value::Null;
    assert!(!v.is_valid(&doc));
    doc["rmsep"] = 0.1.into();
    doc.as_object_mut().unwrap().remove("seed");
    assert!(!v.is_valid(&doc));
}

fn published(
    method: &str,
    n_descriptors: usize,
    n_selected: usize,
    n_latent: usize,
    rmsecv: f64,
    rmsep: f64,
    r_squared: f64,
) -> EvalReport {
    EvalReport {
        method: method.into(),
        n_descriptors,
        n_selected,
        n_latent,
        rmsecv,
        rmsep,
        r_squared,
        n_train: 75,
        n_test: 25,
        seed: 0,
        selected: (0..n_selected).map(|j| format!("x{j}")).collect(),
        wall_time: 0.0,
    }
}

/// The sulfonamide comparison tuples survive a JSON round trip exactly and
/// satisfy the schema.
#[test]
fn published_comparison_round_trips() {
    let v = schema("eval_report.schema.json");
    let fixtures = [
        published("pls", 729, 729, 2, 0.5451, 0.4711, 0.7575),
        published("strs", 729, 29, 15, 0.2635, 0.1676, 0.8758),
        // No test-set r² is published for MC-UVE; 0 stands in so the rest of
        // the tuple can be exercised.
        published("mcuve", 729, 118, 2, 0.3654, 0.3724, 0.0),
    ];
    for report in fixtures {
        report.validate().unwrap();
        let text = serde_json::to_string_pretty(&report).unwrap();
        let back: EvalReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, report);
        assert_valid(&v, &serde_json::from_str(&text).unwrap(), &report.method);
    }
}
