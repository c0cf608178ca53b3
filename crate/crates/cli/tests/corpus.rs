//! The checked-in example configs each reproduce one member of the profile
//! gallery; this suite pins their verdicts end to end through the binary
//! and checks artifact determinism and the exit-code contract.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_pmc-rotor")
}

fn example(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("examples")
        .join(name)
}

fn run_mode(mode: &str, config: &Path, prefix: &Path) -> Output {
    Command::new(bin())
        .arg(mode)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(prefix)
        .output()
        .expect("binary launches")
}

fn classify_verdict(config_name: &str) -> String {
    let dir = tempfile::tempdir().expect("tempdir");
    let prefix = dir.path().join("run");
    let out = run_mode("classify", &example(config_name), &prefix);
    assert!(
        out.status.success(),
        "classify {config_name} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(prefix.with_extension("json")).expect("json artifact");
    let doc: serde_json::Value = serde_json::from_str(&text).expect("well-formed json");
    assert!(
        prefix.with_extension("csv").exists(),
        "{config_name} left no csv"
    );
    doc["verdict"].as_str().expect("verdict string").to_owned()
}

#[test]
fn hbowl_classifies_bowl() {
    assert_eq!(classify_verdict("hbowl.json"), "Bowl");
}

#[test]
fn hcat_classifies_catenoid() {
    assert_eq!(classify_verdict("hcat.json"), "Catenoid");
}

#[test]
fn nod_classifies_nodoid() {
    assert_eq!(classify_verdict("nod.json"), "Nodoid");
}

#[test]
fn undu_classifies_unduloid() {
    assert_eq!(classify_verdict("undu.json"), "Unduloid");
}

#[test]
fn unh_classifies_unduloid() {
    assert_eq!(classify_verdict("unh.json"), "Unduloid");
}

#[test]
fn noes1_classifies_wiggling_disk() {
    assert_eq!(classify_verdict("noes1.json"), "WigglingDisk");
}

#[test]
fn noes2_classifies_non_embedded_disk() {
    assert_eq!(classify_verdict("noes2.json"), "NonEmbeddedDisk");
}

#[test]
fn grim_classifies_convergent_graph() {
    assert_eq!(classify_verdict("grim.json"), "ConvergentGraph");
}

#[test]
fn wing_classifies_wing_like() {
    assert_eq!(classify_verdict("wing.json"), "WingLike");
}

#[test]
fn hno1_classifies_embedded_annulus() {
    assert_eq!(classify_verdict("hno1.json"), "EmbeddedAnnulus");
}

/// The second documented launch loops through two poles and loses
/// embeddedness; the taxonomy has no name for it, so the verdict stays
/// Unknown while the diagnostics carry the facts.
#[test]
fn hno2_stays_unknown_with_loop_diagnostics() {
    let dir = tempfile::tempdir().expect("tempdir");
    let prefix = dir.path().join("run");
    let out = run_mode("classify", &example("hno2.json"), &prefix);
    assert!(
        out.status.success(),
        "classify hno2.json failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(prefix.with_extension("json")).expect("json artifact");
    let doc: serde_json::Value = serde_json::from_str(&text).expect("well-formed json");
    assert_eq!(doc["verdict"], "Unknown");
    assert_eq!(doc["diagnostics"]["embedded"], false);
    assert!(doc["diagnostics"]["pole_crossings"].as_u64().expect("count") >= 2);
}

#[test]
fn gg_renders_the_sphere_portrait() {
    let dir = tempfile::tempdir().expect("tempdir");
    let prefix = dir.path().join("run");
    let out = run_mode("portrait", &example("gg.json"), &prefix);
    assert!(
        out.status.success(),
        "portrait gg.json failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let svg = std::fs::read_to_string(prefix.with_extension("svg")).expect("svg artifact");
    assert!(svg.starts_with("<svg"));
    assert!(svg.contains("polyline"), "portrait has no curves");
}

#[test]
fn identical_config_gives_identical_bytes() {
    let dir = tempfile::tempdir().expect("tempdir");
    let (p1, p2) = (dir.path().join("a"), dir.path().join("b"));
    for p in [&p1, &p2] {
        let out = run_mode("classify", &example("undu.json"), p);
        assert!(out.status.success());
    }
    for ext in ["csv", "json"] {
        let a = std::fs::read(p1.with_extension(ext)).expect("first run artifact");
        let b = std::fs::read(p2.with_extension(ext)).expect("second run artifact");
        assert_eq!(a, b, "{ext} output differs between identical runs");
    }
}

#[test]
fn invalid_config_exits_two_with_line_anchor() {
    let dir = tempfile::tempdir().expect("tempdir");
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\n  \"n\": 1,\n  \"h\": {\"kind\": \"constant\", \"c\": 1.0},\n  \"init\": {\"axis\": {\"delta\": 1}}\n}\n").expect("write config");
    let out = run_mode("classify", &bad, &dir.path().join("x"));
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains(":2:"), "no line anchor in: {stderr}");
}

#[test]
fn verify_mode_passes_and_prints_one_line_per_criterion() {
    let out = Command::new(bin()).arg("verify").output().expect("binary launches");
    assert!(
        out.status.success(),
        "verify failed:\n{}",
        String::from_utf8_lossy(&out.stdout)
    );
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS")).count(), 11);
}
