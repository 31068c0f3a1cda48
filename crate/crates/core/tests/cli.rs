use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tdmm-hand"))
}

fn repo(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

#[test]
fn validate_shipped_config() {
    let cfg = repo("configs/default.json");
    let out = run(&["validate", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    assert!(out.stderr.is_empty());
}

#[test]
fn validate_names_missing_key() {
    let dir = tempfile::tempdir().unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(repo("configs/default.json")).unwrap()).unwrap();
    v.as_object_mut().unwrap().remove("gears");
    let p = write(dir.path(), "c.json", &v.to_string());
    let out = run(&["validate", "--config", p.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(text(&out.stderr).contains("gears"), "{}", text(&out.stderr));
}

#[test]
fn validate_lists_each_violation_on_its_own_line() {
    let dir = tempfile::tempdir().unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(repo("configs/default.json")).unwrap()).unwrap();
    v["geometry"]["r2"] = 0.0.into();
    // k = 40*12/(12*12) = 3.33; 10 deg at the motor is 3 deg at the wheel
    v["gears"]["z4"] = 12.into();
    let p = write(dir.path(), "c.json", &v.to_string());
    let out = run(&["validate", "--config", p.to_str().unwrap()]);
    assert!(!out.status.success());
    let err = text(&out.stderr);
    assert!(err.contains("geometry.r2 must be positive"), "{err}");
    assert!(err.contains("alignment_error_max_deg"), "{err}");
    assert!(err.lines().count() >= 2, "{err}");
}

#[test]
fn curves_write_both_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["curves", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    let summary = text(&out.stdout);
    let theta2 = summary.lines().find(|l| l.starts_with("theta2 ")).unwrap();
    let r2: f64 = theta2.rsplit("r2=").next().unwrap().parse().unwrap();
    assert!(r2 >= 0.98);
    assert!(summary.contains("phi3 slope=1.000000 intercept=0.000000 r2=1.000000"), "{summary}");

    let flexion = std::fs::read_to_string(dir.path().join("flexion.csv")).unwrap();
    let mut lines = flexion.lines();
    assert_eq!(lines.next(), Some("phi1_deg,theta1_deg,theta2_deg,theta3_deg"));
    assert_eq!(lines.next(), Some("0.000000,0.000000,0.000000,0.000000"));
    let roll = std::fs::read_to_string(dir.path().join("roll.csv")).unwrap();
    assert!(roll.starts_with("phi2_deg,phi3_deg\n0.000000,0.000000\n"));
}

#[test]
fn plan_zero_and_full_demands() {
    let dir = tempfile::tempdir().unwrap();
    let zero = write(dir.path(), "zero.txt", &"0\n".repeat(9));
    let out = run(&["plan", zero.to_str().unwrap()]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    let stdout = text(&out.stdout);
    assert!(stdout.contains("\"phases\": []"), "{stdout}");
    assert!(stdout.contains("makespan_s 0.000000"));

    let full = write(dir.path(), "full.txt", "10\n5\n-3\n12\n1\n2\n8\n4\n-6\n");
    let json_path = dir.path().join("plan.json");
    let out = run(&["plan", full.to_str().unwrap(), "--out", json_path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    let plan: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    assert_eq!(plan["phases"].as_array().unwrap().len(), 3);
}

#[test]
fn plan_interleaved_counts_rounds() {
    let dir = tempfile::tempdir().unwrap();
    // largest rotation 10 deg at chunk 1 deg: ten rounds over three classes
    let full = write(dir.path(), "full.txt", "10\n5\n-3\n2\n1\n2\n8\n4\n-6\n");
    let json_path = dir.path().join("plan.json");
    let out = run(&[
        "plan", full.to_str().unwrap(), "--mode", "interleaved", "--chunk", "1", "--out", json_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    let plan: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    assert_eq!(plan["phases"].as_array().unwrap().len(), 30);

    let out = run(&["plan", full.to_str().unwrap(), "--mode", "interleaved"]);
    assert!(!out.status.success());
    assert!(text(&out.stderr).contains("--chunk"));
}

#[test]
fn run_demo_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let script = repo("scripts/demo_grasp.txt");
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out_path in [&a, &b] {
        let out = run(&["run", script.to_str().unwrap(), "--out", out_path.to_str().unwrap(), "--seed", "42"]);
        assert!(out.status.success(), "{}", text(&out.stderr));
        for line in text(&out.stdout).lines().filter(|l| l.starts_with('f')) {
            let th2: f64 = line.split("th2=").nth(1).unwrap().split(' ').next().unwrap().parse().unwrap();
            assert!((th2 - 60.0).abs() <= 0.30, "{line}");
        }
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let events_a = std::fs::read(dir.path().join("a.events.jsonl")).unwrap();
    assert_eq!(events_a, std::fs::read(dir.path().join("b.events.jsonl")).unwrap());
    assert!(text(&events_a).lines().all(|l| serde_json::from_str::<serde_json::Value>(l).is_ok()));

    let header = text(&std::fs::read(&a).unwrap()).lines().next().unwrap().to_string();
    assert!(header.starts_with("t_s,spindle_pos,engaged,wheel_0,"));
    assert!(header.ends_with(",enc_8"));
}

#[test]
fn run_reports_unreachable_joint() {
    let dir = tempfile::tempdir().unwrap();
    let script = write(dir.path(), "bad.txt", "# too far\nmove f0 pip 200\n");
    let csv = dir.path().join("t.csv");
    let out = run(&["run", script.to_str().unwrap(), "--out", csv.to_str().unwrap()]);
    assert!(!out.status.success());
    let err = text(&out.stderr);
    assert!(err.contains("line 2") && err.contains("f0_pip") && err.contains("pip range"), "{err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn run_reports_parse_errors_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let script = write(dir.path(), "bad.txt", "wait 1\nbend f0 pip 10\n");
    let csv = dir.path().join("t.csv");
    let out = run(&["run", script.to_str().unwrap(), "--out", csv.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(text(&out.stderr).contains("line 2: unknown command `bend`"));
}
