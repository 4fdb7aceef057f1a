use std::process::{Command, Output};
use susyqm::verify::{reports_from_json, reports_to_json, CheckName};

fn susyqm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_susyqm"))
        .args(args)
        .env_remove("SUSYQM_SEED")
        .output()
        .expect("run susyqm")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn verify_all_json_round_trips_byte_identically() {
    let out = susyqm(&["verify-all"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let reports = reports_from_json(&text).unwrap();
    assert_eq!(reports.len(), CheckName::ALL.len());
    let names: Vec<_> = reports.iter().map(|r| r.check_name.as_str()).collect();
    let mut sorted = names.clone();
    sorted.sort();
    assert_eq!(names, sorted);
    assert_eq!(reports_to_json(&reports).unwrap() + "\n", text);
}

#[test]
fn tiny_tolerance_fails_with_exit_one() {
    let out = susyqm(&["verify-all", "--check", "eq14_identity", "--tol", "all=1e-30"]);
    assert_eq!(out.status.code(), Some(1));
    let reports = reports_from_json(&stdout(&out)).unwrap();
    assert!(reports.iter().all(|r| !r.passed));
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["verify-all", "--check", "bogus"][..],
        &["verify-all", "--n", "4"],
        &["verify-all", "--tol", "eq14_identity=-1"],
        &["verify-all", "--kappa-min", "2", "--kappa-max", "1"],
        &["frobnicate"],
    ] {
        assert_eq!(susyqm(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn seed_must_be_an_integer() {
    let out = Command::new(env!("CARGO_BIN_EXE_susyqm"))
        .args(["identity"])
        .env("SUSYQM_SEED", "abc")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn csv_has_header_and_unix_line_endings() {
    let out = susyqm(&["verify-all", "--check", "eq14_identity", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("check_name,passed,max_abs_error,tolerance,runtime_ms,grid,params")
    );
    assert!(lines.next().unwrap().starts_with("eq14_identity,true,"));
}

#[test]
fn table_commands_write_to_out_path() {
    let dir = std::env::temp_dir().join(format!("susyqm-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    for cmd in ["potential", "boundstates", "scatter", "phase-equiv", "identity"] {
        let path = dir.join(format!("{cmd}.csv"));
        let out = susyqm(&[cmd, "--n", "2", "--format", "csv", "--out", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(out.stdout.is_empty());
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.lines().count() > 2, "{cmd}");
    }
    std::fs::remove_dir_all(&dir).ok();
}
