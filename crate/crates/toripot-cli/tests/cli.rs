//! End-to-end runs of the binary: output shapes, determinism, exit codes,
//! environment defaults, model files, and structured-output round trips.

use std::process::{Command, Output};

use toripot::report::{BalancedRepr, MatchRepr, ProfileRepr};

fn toripot(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_toripot"))
        .args(args)
        .env_remove("TORIPOT_E")
        .env_remove("TORIPOT_MODE")
        .output()
        .expect("the binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = toripot(args);
    assert!(
        out.status.success(),
        "exit {:?}, stderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf8 output")
}

fn failure(args: &[&str]) -> (i32, String) {
    let out = toripot(args);
    assert!(!out.status.success(), "unexpectedly succeeded: {args:?}");
    (
        out.status.code().expect("exit code"),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn po_specializes_and_merges_terms() {
    let text = stdout(&["po", "--model", "F2hat", "--u", "1/2,1/2"]);
    assert!(text.starts_with("potential of F2hat at u = (1/2, 1/2)\n"));
    assert!(text.contains("2*T^(1/2)*y2^(-1)"));

    let symbolic = stdout(&["po", "--model", "F2", "--alpha", "1/4"]);
    assert_eq!(symbolic.matches("T^(").count(), 5);
    assert!(symbolic.contains("T^(3/4 - u2)*y2^(-1)"));
    assert!(symbolic.contains("T^(5/4 - u2)*y2^(-1)"));
}

#[test]
fn crit_reports_points_and_values() {
    let text = stdout(&["crit", "--model", "S2xS2", "--alpha", "1/4", "--u", "3/8,5/8", "--E", "3"]);
    assert!(text.contains("critical points: 4 (total multiplicity 4)"));
    assert!(text.contains("value = 2*T^(3/8) + 2*T^(5/8) + O(T^(3))"));
    assert!(text.contains("value = -2*T^(3/8) - 2*T^(5/8) + O(T^(3))"));

    let two = stdout(&["crit", "--model", "F2hat", "--u", "1/2,1/2", "--E", "3"]);
    assert!(two.contains("critical points: 2"));
    assert!(two.contains("value = 4*T^(1/2) + O(T^(3))"));
    assert!(two.contains("value = -4*T^(1/2) + O(T^(3))"));
}

#[test]
fn crit_reports_the_continuum() {
    let text = stdout(&["crit", "--model", "F2hat", "--u", "2/5,3/5", "--E", "2"]);
    assert!(text.contains("critical points: 0"));
    assert!(text.contains("families: 1"));
    assert!(text.contains("constraint: y^(1, 1) = -1"));
}

#[test]
fn balanced_locates_the_fibers() {
    let text = stdout(&["balanced", "--model", "F2", "--alpha", "1/4"]);
    assert!(text.contains("balanced points of F2: 1"));
    assert!(text.contains("  (5/8, 3/8)"));

    let hat = stdout(&["balanced", "--model", "F2hat"]);
    assert!(hat.contains("  (1/2, 1/2)"));
    assert!(hat.contains("balanced segments: 1"));
    assert!(hat.contains("open segment (0, 1) .. (1/2, 1/2)"));
}

#[test]
fn match_recovers_the_correction() {
    let text = stdout(&["match", "--unknown", "F2", "--reference", "S2xS2", "--alpha", "1/4", "--E", "3"]);
    assert!(text.starts_with("correction = T^(1/2) + O(T^(3))\n"));
    assert!(text.contains("T^(1/2): coefficient 1"));
}

#[test]
fn bulk_splits_the_family() {
    let text = stdout(&["bulk", "--model", "F2hat", "--u", "2/5,3/5", "--rho", "auto", "--E", "2"]);
    assert!(text.starts_with("bulk divisor S2van, rho = 1/10\n"));
    assert!(text.contains("critical points: 2"));
    assert!(text.contains("y2 = 1 + 1/24*T^(1/5)"));
    assert!(text.contains("families: 0"));
}

#[test]
fn family_sweeps_the_monotone_line() {
    let text = stdout(&[
        "family", "--model", "F2hat", "--start", "9/20,11/20", "--end", "1/4,3/4",
        "--steps", "5", "--E", "2",
    ]);
    assert!(text.starts_with("sweep samples: 5\n"));
    assert_eq!(text.matches("families: 1").count(), 5);
    assert_eq!(text.matches("critical points: 0").count(), 5);
    assert!(text.contains("u = (7/20, 13/20)"));
}

#[test]
fn structured_output_is_byte_identical_across_runs() {
    let args = ["crit", "--model", "F2", "--alpha", "1/4", "--u", "5/8,3/8", "--E", "2", "--format", "json"];
    assert_eq!(stdout(&args), stdout(&args));

    let args = ["balanced", "--model", "F2hat", "--format", "json"];
    assert_eq!(stdout(&args), stdout(&args));
}

#[test]
fn structured_output_round_trips() {
    let json = stdout(&["crit", "--model", "S2xS2", "--alpha", "1/4", "--u", "3/8,5/8", "--E", "2", "--format", "json"]);
    let profile: ProfileRepr = serde_json::from_str(&json).expect("well-formed profile");
    assert_eq!(profile.points.len(), 4);
    let again = serde_json::to_string_pretty(&profile).expect("serializes") + "\n";
    assert_eq!(again, json);

    let json = stdout(&["balanced", "--model", "F2", "--alpha", "1/4", "--format", "json"]);
    let balanced: BalancedRepr = serde_json::from_str(&json).expect("well-formed report");
    assert_eq!(balanced.points, vec![vec!["5/8".to_string(), "3/8".to_string()]]);

    let json = stdout(&["match", "--unknown", "F2", "--reference", "S2xS2", "--alpha", "1/4", "--E", "2", "--format", "json"]);
    let outcome: MatchRepr = serde_json::from_str(&json).expect("well-formed outcome");
    assert_eq!(outcome.levels[0].coefficient, "1");
}

#[test]
fn float_mode_runs_the_profile() {
    let text = stdout(&["crit", "--model", "S2xS2", "--alpha", "1/4", "--u", "3/8,5/8", "--E", "2", "--mode", "float"]);
    assert!(text.contains("critical points: 4"));
}

#[test]
fn environment_sets_the_default_cutoff() {
    let out = Command::new(env!("CARGO_BIN_EXE_toripot"))
        .args(["crit", "--model", "F2hat", "--u", "1/2,1/2"])
        .env("TORIPOT_E", "3")
        .env_remove("TORIPOT_MODE")
        .output()
        .expect("the binary runs");
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("O(T^(3))"));
}

#[test]
fn model_files_load_with_overrides() {
    let dir = std::env::temp_dir().join("toripot-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("product.toml");
    std::fs::write(
        &path,
        r#"
name = "product-file"
dim = 2
betti_sum = 4

[[facets]]
normal = [1, 0]
offset = "0"

[[facets]]
normal = [-1, 0]
offset = "1 - alpha"

[[facets]]
normal = [0, 1]
offset = "0"

[[facets]]
normal = [0, -1]
offset = "1 + alpha"
"#,
    )
    .unwrap();
    let text = stdout(&["balanced", "--model", path.to_str().unwrap(), "--alpha", "1/4"]);
    assert!(text.contains("balanced points of product-file: 1"));
    assert!(text.contains("  (3/8, 5/8)"));
}

#[test]
fn exit_codes_follow_the_documented_buckets() {
    let (code, err) = failure(&["crit", "--model", "F2hat", "--u", "2,2", "--E", "2"]);
    assert_eq!(code, 2, "interior violation is a domain error: {err}");
    assert!(err.starts_with("error: "));

    let (code, _) = failure(&["crit", "--model", "F2", "--u", "1/2,1/2", "--E", "2"]);
    assert_eq!(code, 2, "missing alpha is a validation error");

    let (code, _) = failure(&["crit", "--model", "F2hat", "--u", "junk", "--E", "2"]);
    assert_eq!(code, 4, "a malformed fiber point is a parse error");

    let (code, _) = failure(&["crit", "--model", "F2hat", "--u", "1/2,1/2", "--E", "x"]);
    assert_eq!(code, 4, "a malformed cutoff is a parse error");

    let (code, _) = failure(&["match", "--unknown", "F2hat", "--reference", "S2xS2", "--alpha", "1/4"]);
    assert_eq!(code, 3, "an unsupported matching pair is a solver failure");

    let (code, _) = failure(&["match", "--unknown", "F2", "--reference", "S2xS2", "--alpha", "1/4", "--E", "2", "--mode", "float"]);
    assert_eq!(code, 3, "float-mode matching is a solver failure");
}
