use std::path::Path;
use std::process::Command;

fn l1ilc() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_l1ilc"));
    c.env_remove("L1ILC_SEED").env_remove("L1ILC_OUT").env("RUST_LOG", "warn");
    c
}

fn write_scenario(dir: &Path, name: &str, plant: &str, kind: &str) -> std::path::PathBuf {
    let path = dir.join(format!("{name}.toml"));
    std::fs::write(
        &path,
        format!(
            r#"
name = "{name}"
plant = "{plant}"
iterations = 10
[controller]
kind = "{kind}"
[trajectory]
waypoints = [[0.0, 0.0, 1.0], [0.5, 0.5, 1.5]]
segment_durations = [2.0]
n = 100
dt = 0.02
"#
        ),
    )
    .unwrap();
    path
}

#[test]
fn run_transfer_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let results = dir.path().join("results");
    let donor = write_scenario(dir.path(), "slow_l1", "slow", "l1");
    let out = l1ilc()
        .args(["run", donor.to_str().unwrap(), "--out"])
        .arg(results.join("slow_l1"))
        .args(["--reps", "2", "--seed", "4"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("2 repetition(s)"));

    let recipient = write_scenario(dir.path(), "fast_l1", "fast", "l1");
    let out = l1ilc()
        .args(["transfer", "--from"])
        .arg(results.join("slow_l1/state.json"))
        .args(["--scenario", recipient.to_str().unwrap(), "--out"])
        .arg(results.join("fast_l1_transfer"))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    // PD models differ between vehicles: refused without the override.
    let pd = write_scenario(dir.path(), "fast_pd", "fast", "pd");
    let out = l1ilc()
        .args(["transfer", "--from"])
        .arg(results.join("slow_l1/state.json"))
        .args(["--scenario", pd.to_str().unwrap(), "--out"])
        .arg(dir.path().join("refused"))
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("learning state was produced for model"));

    let out = l1ilc().arg("report").arg(&results).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("Tracking error on plant `slow`"), "{text}");
    assert!(text.contains("Factor of error increase"), "{text}");
    assert!(results.join("report.txt").is_file());
    assert!(results.join("report_0.csv").is_file());
}

#[test]
fn check_l1_reports_the_condition() {
    let out = l1ilc().args(["check-l1", "slow", "default"]).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("g_norm_times_l"));
    assert!(text.contains("condition holds on every axis"));

    let out = l1ilc().args(["check-l1", "slow", "default", "--lipschitz", "1000"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let ctrl = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/l1_controller.toml");
    let out = l1ilc().args(["check-l1", "slow"]).arg(ctrl).output().unwrap();
    assert!(out.status.success());
}

#[test]
fn bad_input_fails_cleanly() {
    let out = l1ilc().args(["run", "/nonexistent/scenario.toml"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}
