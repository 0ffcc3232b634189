use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn models() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/models")
}

fn model(name: &str) -> String {
    models().join(name).to_str().unwrap().to_owned()
}

fn qualinet(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qualinet"))
        .args(args)
        .current_dir(dir)
        .env("QUALINET_LOG", "error")
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn validate_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = qualinet(dir.path(), &["validate", &model("cm1.qm")]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "8 activities, 3 facts, 3 impacts, 4 indicators\n");
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = qualinet(dir.path(), &["infer", "missing.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    assert_eq!(qualinet(dir.path(), &["frobnicate"]).status.code(), Some(2));
    assert_eq!(qualinet(dir.path(), &["compare", &model("cm1.qm")]).status.code(), Some(2));
    let out = qualinet(dir.path(), &["infer", &model("cm1.qm"), "--set", "novalue"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn domain_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.qm"), "model \"m\" { activity A impact E.X -> A + }").unwrap();
    let out = qualinet(dir.path(), &["validate", "bad.qm"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.qm"));

    let out = qualinet(dir.path(), &["infer", &model("cm1.qm"), "--set", "Nope=1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Nope"));

    let out = qualinet(dir.path(), &["compile", &model("cm1.qm"), "--goal", "security"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn infer_matches_api_body() {
    let dir = tempfile::tempdir().unwrap();
    let out = qualinet(dir.path(), &["infer", &model("cm1.qm"), &model("measured.json")]);
    assert_eq!(out.status.code(), Some(0));

    let text = std::fs::read_to_string(models().join("cm1.qm")).unwrap();
    let m = qualinet::parse_model(&text).unwrap();
    let net = qualinet::compile(&m, qualinet::resolve_goal(&m, None).unwrap()).unwrap();
    let scenario: qualinet::Scenario =
        serde_json::from_str(&std::fs::read_to_string(models().join("measured.json")).unwrap()).unwrap();
    assert_eq!(stdout(&out), qualinet_server::infer_json(&net, &scenario.evidence).unwrap());

    let inline = qualinet(
        dir.path(),
        &[
            "infer",
            &model("cm1.qm"),
            "--set",
            "AvgCyclomaticComplexity=5.18",
            "--set",
            "AvgModuleSize=33.47",
            "--set",
            "CommentRatio=0.2517",
        ],
    );
    assert_eq!(stdout(&inline), stdout(&out));
}

#[test]
fn output_goes_only_to_the_named_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = qualinet(dir.path(), &["compile", &model("cm1.qm"), "-o", "net.json"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let entries: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(entries.len(), 1);
    let net = std::fs::read_to_string(dir.path().join("net.json")).unwrap();
    assert!(qualinet::Network::from_json(&net).is_ok());
}

#[test]
fn pretty_and_csv_renderings() {
    let dir = tempfile::tempdir().unwrap();
    let out = qualinet(dir.path(), &["scenario", &model("cm1.qm"), &model("measured.json"), "--pretty"]);
    let text = stdout(&out);
    assert!(text.starts_with("scenario Measured values\n"));
    assert!(text.contains("mean=22.979"));

    let out = qualinet(dir.path(), &["matrix", &model("cm1.qm"), "--pretty"]);
    assert!(stdout(&out).contains("Testing"));
    let out = qualinet(dir.path(), &["matrix", &model("cm1.qm")]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 3);

    let out = qualinet(
        dir.path(),
        &["compare", &model("cm1.qm"), &model("baseline.json"), &model("measured.json"), "--csv"],
    );
    assert!(stdout(&out).starts_with("node,quantity,No observations,Measured values,delta Measured values\n"));

    let out = qualinet(
        dir.path(),
        &["sensitivity", &model("cm1.qm"), "--target", "Maintenance", "--state", "high", "--pretty"],
    );
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).lines().count(), 3);
}

#[test]
fn out_of_range_values_warn_but_succeed() {
    let dir = tempfile::tempdir().unwrap();
    let out = qualinet(dir.path(), &["infer", &model("cm1.qm"), "--set", "CommentRatio=0.9"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["warnings"][0].as_str().unwrap().contains("clamped"));
}
